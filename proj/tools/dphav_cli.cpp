// Command-line front end: tabular sweeps over the DPHAV conditioning
// pipeline (photon statistics, conditional states, phase densities, Wigner
// maps, correlations, non-Gaussianity, Monte-Carlo emulation), written as
// CSV or JSON.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dphav/dphav.hpp"

namespace {

using dphav::AcceptanceRule;
using dphav::DphavSpec;
using nlohmann::json;

// ---------------------------------------------------------------------------
// output plumbing

using Cell = std::variant<long long, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

struct OutputOptions {
    std::string format = "csv";
    std::string path;
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const Table& table) {
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        os << table.columns[c] << (c + 1 < table.columns.size() ? "," : "");
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        os << format_double(v);
                    else
                        os << v;
                },
                row[c]);
            os << (c + 1 < row.size() ? "," : "");
        }
        os << '\n';
    }
}

void write_json(std::ostream& os, const Table& table, const json& meta) {
    json data = json::array();
    for (const auto& row : table.rows) {
        json obj = json::object();
        for (std::size_t c = 0; c < row.size(); ++c)
            std::visit([&](const auto& v) { obj[table.columns[c]] = v; }, row[c]);
        data.push_back(std::move(obj));
    }
    json out{{"meta", meta}, {"data", std::move(data)}};
    os << out.dump(2) << '\n';
}

void emit(const Table& table, const json& meta, const OutputOptions& opts) {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!opts.path.empty()) {
        file.open(opts.path, std::ios::binary);
        if (!file) throw std::invalid_argument("cannot open output file: " + opts.path);
        os = &file;
    }
    if (opts.format == "csv")
        write_csv(*os, table);
    else
        write_json(*os, table, meta);
}

json meta_for(double alpha2, double beta2, double eta, std::optional<std::string> rule,
              std::optional<std::uint64_t> seed) {
    json meta;
    meta["spec"] = {{"alpha2", alpha2}, {"beta2", beta2}};
    meta["eta"] = eta;
    meta["rule"] = rule ? json(*rule) : json(nullptr);
    meta["seed"] = seed ? json(*seed) : json(nullptr);
    return meta;
}

// ---------------------------------------------------------------------------
// config files: plain `key = value` lines, `#` comments. Values are injected
// as trailing arguments for every key whose flag is absent from the command
// line, so explicit flags always win.

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool truthy(const std::string& v) {
    return v == "1" || v == "true" || v == "yes" || v == "on";
}

std::vector<std::string> apply_config_file(const CLI::App& app, std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return args;
    std::ifstream file(path);
    if (!file) throw std::invalid_argument("cannot open config file: " + path);

    const CLI::App* sub = nullptr;
    for (const auto& arg : args)
        if (!arg.empty() && arg.front() != '-' &&
            (sub = app.get_subcommand_no_throw(arg)) != nullptr)
            break;

    auto given = [&](const std::string& flag) {
        for (const auto& arg : args)
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) return true;
        return false;
    };

    std::string line;
    while (std::getline(file, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto equals = line.find('=');
        if (equals == std::string::npos)
            throw std::invalid_argument("config line is not `key = value`: " + line);
        const std::string key = trim(line.substr(0, equals));
        std::string value = trim(line.substr(equals + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty()) throw std::invalid_argument("config line has an empty key: " + line);
        const std::string flag = "--" + key;
        if (given(flag)) continue;
        const CLI::Option* op =
            sub != nullptr ? sub->get_option_no_throw(flag) : nullptr;
        if (op != nullptr && op->get_expected_min() == 0) {
            if (truthy(value)) args.push_back(flag);  // boolean flag
        } else {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

// ---------------------------------------------------------------------------
// flag parsing helpers

std::vector<int> parse_int_range(const std::string& text) {
    std::vector<int> values;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        if (hi < lo) throw CLI::ValidationError("range", "descending range: " + text);
        for (int v = lo; v <= hi; ++v) values.push_back(v);
        return values;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = text.substr(start, comma - start);
        if (!item.empty()) values.push_back(std::stoi(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (values.empty()) throw CLI::ValidationError("range", "empty range: " + text);
    return values;
}

std::vector<double> parse_double_range(const std::string& text, int steps) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) return {std::stod(text)};
    const double lo = std::stod(text.substr(0, dots));
    const double hi = std::stod(text.substr(dots + 2));
    if (steps < 2) throw CLI::ValidationError("steps", "need at least 2 sweep steps");
    std::vector<double> values(steps);
    for (int i = 0; i < steps; ++i) values[i] = lo + (hi - lo) * i / (steps - 1);
    return values;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = text.substr(start, comma - start);
        if (!item.empty()) items.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

// Kinds swept over --m1; "all" is accepted and simply ignores the value.
AcceptanceRule rule_for(const std::string& kind, int m1) {
    if (kind == "all") return AcceptanceRule::all();
    if (kind == "eq") return AcceptanceRule::eq(m1);
    if (kind == "neq") return AcceptanceRule::neq(m1);
    if (kind == "gt") return AcceptanceRule::gt(m1);
    if (kind == "leq") return AcceptanceRule::leq(m1);
    throw std::invalid_argument("unknown rule kind '" + kind +
                                "' (expected all, eq, neq, gt or leq)");
}

struct CommonArgs {
    double alpha2 = 0.0;
    double beta2 = 0.0;
    double eta = 1.0;
    std::size_t points = dphav::QuadraturePolicy{}.points;
    std::string config_path;  // consumed before parsing; kept for --help

    DphavSpec spec() const { return DphavSpec::from_intensities(alpha2, beta2); }
    dphav::QuadraturePolicy quadrature() const {
        dphav::QuadraturePolicy policy;
        policy.points = points;
        return policy;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, OutputOptions& out, bool require_spec = true) {
    auto* a = cmd->add_option("--alpha2", args.alpha2, "displacement intensity alpha^2");
    auto* b = cmd->add_option("--beta2", args.beta2, "phase-averaged intensity beta^2");
    if (require_spec) {
        a->required();
        b->required();
    }
    cmd->add_option("--eta", args.eta, "detector efficiency in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--points", args.points, "phase quadrature points (even)");
    cmd->add_option("--format", out.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--output,-o", out.path, "output file (default stdout)");
    cmd->add_option("--config", args.config_path,
                    "key = value config file; flags override it");
}

// ---------------------------------------------------------------------------
// subcommands

void run_stats(const CommonArgs& args, int n_max_flag, bool moments_only, bool closed_form,
               const OutputOptions& out) {
    const DphavSpec spec = args.spec();
    const DphavSpec detected = spec.rescaled(args.eta);
    const json meta = meta_for(args.alpha2, args.beta2, args.eta, std::nullopt, std::nullopt);

    if (moments_only) {
        const auto m = dphav::dphav_moments(detected);
        Table table;
        table.columns = {"mean_photons", "variance_photons", "k_factor"};
        table.add_row({m.mean, m.variance, m.k_factor});
        emit(table, meta, out);
        return;
    }

    const int n_max =
        n_max_flag >= 0 ? n_max_flag : dphav::choose_cutoff(detected.peak_intensity());
    const auto dist = dphav::dphav_photon_dist_quadrature(detected, n_max, args.quadrature());
    const auto phav = dphav::phav_photon_dist(detected.beta_sq(), n_max);
    Table table;
    table.columns = {"photon_k", "prob_dphav", "prob_phav"};
    if (closed_form) table.columns.push_back("prob_closedform");
    for (int k = 0; k <= n_max; ++k) {
        std::vector<Cell> row{static_cast<long long>(k), dist.probs[k], phav.probs[k]};
        if (closed_form) row.emplace_back(dphav::dphav_photon_dist_closedform(detected, k));
        table.add_row(std::move(row));
    }
    emit(table, meta, out);
}

void run_condition(const CommonArgs& args, const std::string& rules_text,
                   const std::string& m1_text, bool with_dist, const OutputOptions& out) {
    const DphavSpec spec = args.spec();
    const auto amps = dphav::split(spec);
    const auto rules = split_list(rules_text);
    const auto values = parse_int_range(m1_text);
    const int m_max = dphav::choose_cutoff(amps.peak_intensity());
    const json meta = meta_for(args.alpha2, args.beta2, args.eta, rules_text, std::nullopt);

    Table table;
    if (with_dist)
        table.columns = {"rule", "m1", "photon_m", "prob"};
    else
        table.columns = {"rule", "m1", "acceptance_prob", "mean_detected"};

    for (const auto& kind : rules) {
        for (int m1 : values) {
            const auto rule = rule_for(kind, m1);
            const auto pd =
                dphav::phase_distribution(amps, rule, args.eta, args.quadrature());
            const auto dist = dphav::conditional_detected_dist(amps, pd, args.eta, m_max);
            if (with_dist) {
                for (int m = 0; m <= m_max; ++m)
                    table.add_row({kind, static_cast<long long>(m1),
                                   static_cast<long long>(m), dist.probs[m]});
            } else {
                table.add_row({kind, static_cast<long long>(m1), pd.norm_constant,
                               dphav::conditional_mean(dist)});
            }
        }
    }
    emit(table, meta, out);
}

void run_phase(const CommonArgs& args, std::string rule_text, int k_flag, bool gauss,
               const OutputOptions& out) {
    const DphavSpec spec = args.spec();
    const auto amps = dphav::split(spec);
    if (rule_text.find(':') == std::string::npos && rule_text != "all") {
        if (k_flag < 0)
            throw CLI::ValidationError("--rule",
                                       "rule '" + rule_text + "' needs --k (or use eq:6)");
        rule_text += ":" + std::to_string(k_flag);
    }
    auto rule = AcceptanceRule::parse(rule_text);
    if (k_flag >= 0) rule = rule.with_value(k_flag);

    const auto pd = dphav::phase_distribution(amps, rule, args.eta, args.quadrature());
    const json meta = meta_for(args.alpha2, args.beta2, args.eta, rule.label(), std::nullopt);

    std::optional<std::pair<double, double>> peaks;
    if (rule.kind() == AcceptanceRule::Kind::Eq && amps.a_t * amps.b_t > 0.0) {
        const auto locs = dphav::peak_locations(amps, rule.lower());
        peaks = locs.size() == 2 ? std::pair{locs[1], locs[0]} : std::pair{locs[0], locs[0]};
    }
    std::optional<double> variance;
    if (gauss) {
        if (rule.kind() != AcceptanceRule::Kind::Eq)
            throw CLI::ValidationError("--gauss", "the normal overlay needs an eq rule");
        variance = dphav::gaussian_approx(amps, rule.lower());  // throws below threshold
    }

    Table table;
    table.columns = {"phi_rad", "density_per_rad"};
    if (variance) table.columns.push_back("normal_approx_per_rad");
    if (peaks) {
        table.columns.push_back("phi_peak_pos_rad");
        table.columns.push_back("phi_peak_neg_rad");
    }
    for (std::size_t j = 0; j < pd.grid.size(); ++j) {
        std::vector<Cell> row{pd.grid.angle(j), pd.density[j]};
        if (variance)
            row.emplace_back(dphav::gaussian_phase_density(pd.grid.angle(j), *variance));
        if (peaks) {
            row.emplace_back(peaks->first);
            row.emplace_back(peaks->second);
        }
        table.add_row(std::move(row));
    }
    emit(table, meta, out);
}

void run_wigner(const CommonArgs& args, const std::string& rule_text, int k_flag, double extent,
                int n_nodes, const OutputOptions& out) {
    const DphavSpec spec = args.spec();
    double a_eff, b_eff;
    dphav::PhaseDistribution pd = dphav::PhaseDistribution::uniform(args.points);
    std::optional<std::string> rule_label;
    if (rule_text.empty()) {
        a_eff = spec.alpha;
        b_eff = spec.beta;
    } else {
        const auto amps = dphav::split(spec);
        auto rule = AcceptanceRule::parse(
            rule_text.find(':') == std::string::npos && rule_text != "all" && k_flag >= 0
                ? rule_text + ":" + std::to_string(k_flag)
                : rule_text);
        if (k_flag >= 0) rule = rule.with_value(k_flag);
        pd = dphav::phase_distribution(amps, rule, args.eta, args.quadrature());
        a_eff = amps.a_t;
        b_eff = amps.b_t;
        rule_label = rule.label();
    }
    if (extent <= 0.0)
        extent = std::ceil(std::numbers::sqrt2 * (a_eff + b_eff) + 5.0 / std::numbers::sqrt2);

    const auto grid = dphav::PhaseSpaceGrid::centered(extent, n_nodes);
    const auto field = dphav::wigner_of_phase_mixture(a_eff, b_eff, pd, grid);
    if (!field.coverage_ok)
        std::cerr << "warning: phase-space grid does not cover the state to five standard"
                     " deviations; increase --extent\n";

    Table table;
    table.columns = {"x", "p", "wigner"};
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.np; ++j)
            table.add_row({grid.x_at(i), grid.p_at(j), field.values(i, j)});
    emit(table, meta_for(args.alpha2, args.beta2, args.eta, rule_label, std::nullopt), out);
}

void run_correlate(CommonArgs args, bool alpha_eq_beta, const std::string& mean_range, int steps,
                   bool with_joint, const OutputOptions& out) {
    Table table;
    table.columns = {"alpha2", "beta2", "eta", "mean_detected_total", "corr_formula"};
    if (with_joint) table.columns.push_back("corr_joint");

    std::vector<DphavSpec> specs;
    if (alpha_eq_beta) {
        for (double mean : parse_double_range(mean_range, steps)) {
            const double intensity = mean / (2.0 * args.eta);
            specs.push_back(DphavSpec::from_intensities(intensity, intensity));
        }
    } else {
        specs.push_back(args.spec());
    }

    for (const auto& spec : specs) {
        const double a2 = args.eta * spec.alpha_sq();
        const double b2 = args.eta * spec.beta_sq();
        std::vector<Cell> row{spec.alpha_sq(), spec.beta_sq(), args.eta,
                              args.eta * spec.mean_photons(),
                              dphav::correlation_formula(a2, b2)};
        if (with_joint) {
            const int m_max = dphav::choose_cutoff(
                args.eta * dphav::split(spec).peak_intensity());
            row.emplace_back(
                dphav::joint_detected_dist(spec, args.eta, m_max, args.quadrature())
                    .pearson());
        }
        table.add_row(std::move(row));
    }
    const double meta_a2 = alpha_eq_beta ? specs.back().alpha_sq() : args.alpha2;
    const double meta_b2 = alpha_eq_beta ? specs.back().beta_sq() : args.beta2;
    emit(table, meta_for(meta_a2, meta_b2, args.eta, std::nullopt, std::nullopt), out);
}

void run_nongauss(const CommonArgs& args, const std::string& rules_text,
                  const std::string& m1_text, const std::string& alpha2_list, bool with_delta,
                  const OutputOptions& out) {
    const auto rules = split_list(rules_text);
    const auto values = parse_int_range(m1_text);
    std::vector<double> alpha2s{args.alpha2};
    if (!alpha2_list.empty()) {
        alpha2s.clear();
        for (const auto& item : split_list(alpha2_list)) alpha2s.push_back(std::stod(item));
        if (alpha2s.empty()) throw std::invalid_argument("--alpha2-list is empty");
    }
    const bool spec_grid = alpha2s.size() > 1;

    struct Row {
        double eps_all = 0.0, delta_all = 0.0;
        std::vector<double> eps, delta, mean;
    };
    auto compute = [&](double alpha2, int m1) {
        const auto spec = DphavSpec::from_intensities(alpha2, args.beta2);
        const auto amps = dphav::split(spec);
        const int m_max = dphav::choose_cutoff(amps.peak_intensity());
        Row row;
        const auto pd_all = dphav::PhaseDistribution::uniform(args.points);
        row.eps_all = dphav::epsilon_bound(
                          dphav::conditional_detected_dist(amps, pd_all, args.eta, m_max))
                          .value;
        if (with_delta)
            row.delta_all =
                dphav::delta_full(dphav::conditional_density_matrix(amps, pd_all, m_max),
                                  dphav::covariance_of_conditional(amps, pd_all))
                    .value;
        for (const auto& kind : rules) {
            const auto rule = rule_for(kind, m1);
            const auto pd =
                dphav::phase_distribution(amps, rule, args.eta, args.quadrature());
            const auto dist = dphav::conditional_detected_dist(amps, pd, args.eta, m_max);
            row.eps.push_back(dphav::epsilon_bound(dist).value);
            row.mean.push_back(dphav::conditional_mean(dist));
            if (with_delta)
                row.delta.push_back(
                    dphav::delta_full(dphav::conditional_density_matrix(amps, pd, m_max),
                                      dphav::covariance_of_conditional(amps, pd))
                        .value);
        }
        return row;
    };

    // sweep points are independent; dispatch and assemble in flag order
    std::vector<std::future<Row>> futures;
    futures.reserve(alpha2s.size() * values.size());
    for (double alpha2 : alpha2s)
        for (int m1 : values)
            futures.push_back(std::async(std::launch::async, compute, alpha2, m1));

    Table table;
    if (spec_grid) table.columns.push_back("alpha2");
    table.columns.push_back("m1");
    for (const auto& kind : rules) table.columns.push_back("eps_" + kind);
    if (with_delta)
        for (const auto& kind : rules) table.columns.push_back("delta_" + kind);
    for (const auto& kind : rules) table.columns.push_back("mean_" + kind);
    table.columns.push_back("eps_unconditioned");
    if (with_delta) table.columns.push_back("delta_unconditioned");

    std::size_t index = 0;
    for (double alpha2 : alpha2s) {
        for (int m1 : values) {
            const Row row = futures[index++].get();
            std::vector<Cell> cells;
            if (spec_grid) cells.emplace_back(alpha2);
            cells.emplace_back(static_cast<long long>(m1));
            for (double e : row.eps) cells.emplace_back(e);
            for (double d : row.delta) cells.emplace_back(d);
            for (double m : row.mean) cells.emplace_back(m);
            cells.emplace_back(row.eps_all);
            if (with_delta) cells.emplace_back(row.delta_all);
            table.add_row(std::move(cells));
        }
    }
    emit(table, meta_for(alpha2s.front(), args.beta2, args.eta, rules_text, std::nullopt), out);
}

void run_simulate(const CommonArgs& args, std::uint64_t shots, std::uint64_t seed,
                  const std::string& rules_text, const std::string& m1_text,
                  const std::string& records_path, unsigned threads,
                  const OutputOptions& out) {
    const DphavSpec spec = args.spec();
    const dphav::RunConfig config{spec, args.eta, shots, seed};
    const auto records = dphav::simulate_shots(config, threads);
    const auto amps = dphav::split(spec);
    const int m_max = dphav::choose_cutoff(args.eta * amps.peak_intensity());

    if (!records_path.empty()) {
        std::ofstream rec_file(records_path, std::ios::binary);
        if (!rec_file)
            throw std::invalid_argument("cannot open records file: " + records_path);
        dphav::write_records_csv(rec_file, records);
    }

    Table table;
    const json meta =
        meta_for(args.alpha2, args.beta2, args.eta,
                 rules_text.empty() ? std::optional<std::string>{}
                                    : std::optional<std::string>{rules_text},
                 seed);

    if (rules_text.empty()) {
        double mean1 = 0.0, mean2 = 0.0;
        for (const auto& rec : records) {
            mean1 += rec.m1;
            mean2 += rec.m2;
        }
        mean1 /= double(records.size());
        mean2 /= double(records.size());
        double v1 = 0.0, v2 = 0.0, cov = 0.0;
        for (const auto& rec : records) {
            v1 += (rec.m1 - mean1) * (rec.m1 - mean1);
            v2 += (rec.m2 - mean2) * (rec.m2 - mean2);
            cov += (rec.m1 - mean1) * (rec.m2 - mean2);
        }
        const auto marginal = dphav::reconstruct_conditional(records, AcceptanceRule::all());
        const auto analytic = dphav::conditional_detected_dist(
            amps, dphav::PhaseDistribution::uniform(args.points), args.eta, m_max);
        table.columns = {"shots",      "mean_m1",           "mean_m2",
                         "pearson_mc", "pearson_formula",   "fidelity_marginal"};
        table.add_row({static_cast<long long>(shots), mean1, mean2,
                       cov / std::sqrt(v1 * v2),
                       dphav::correlation_formula(args.eta * spec.alpha_sq(),
                                                  args.eta * spec.beta_sq()),
                       dphav::fidelity(marginal.dist, analytic)});
        emit(table, meta, out);
        return;
    }

    table.columns = {"rule",    "m1",      "accepted",        "acceptance_mc",
                     "acceptance_analytic", "mean_mc", "mean_analytic", "fidelity"};
    for (const auto& kind : split_list(rules_text)) {
        for (int m1 : parse_int_range(m1_text)) {
            const auto rule = rule_for(kind, m1);
            const auto pd =
                dphav::phase_distribution(amps, rule, args.eta, args.quadrature());
            const auto analytic =
                dphav::conditional_detected_dist(amps, pd, args.eta, m_max);
            const auto rec = dphav::reconstruct_conditional(records, rule);
            table.add_row({kind, static_cast<long long>(m1),
                           static_cast<long long>(rec.accepted), rec.acceptance_fraction,
                           pd.norm_constant, rec.mean, dphav::conditional_mean(analytic),
                           dphav::fidelity(rec.dist, analytic)});
        }
    }
    emit(table, meta, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"displaced phase-averaged coherent states under photon-subtraction"
                 " conditioning"};
    app.require_subcommand(1);

    CommonArgs stats_args, cond_args, phase_args, wigner_args, corr_args, ng_args, sim_args;
    OutputOptions stats_out, cond_out, phase_out, wigner_out, corr_out, ng_out, sim_out;

    // stats
    auto* stats = app.add_subcommand("stats", "PHAV/DPHAV photon distributions and moments");
    int stats_nmax = -1;
    bool stats_moments = false, stats_closed = false;
    add_common(stats, stats_args, stats_out);
    stats->add_option("--nmax", stats_nmax, "photon cutoff (default: automatic)")
        ->check(CLI::Range(0, 65536));
    stats->add_flag("--moments", stats_moments, "emit mean/variance/K instead of the table");
    stats->add_flag("--closed-form", stats_closed, "add the hypergeometric closed-form column");
    stats->callback([&] { run_stats(stats_args, stats_nmax, stats_moments, stats_closed,
                                    stats_out); });

    // condition
    auto* cond = app.add_subcommand("condition",
                                    "conditional detected distributions and means per rule");
    std::string cond_rules = "eq", cond_m1 = "0..8";
    bool cond_dist = false;
    add_common(cond, cond_args, cond_out);
    cond->add_option("--rules", cond_rules, "comma list of rules: eq,neq,gt,leq,all");
    cond->add_option("--m1", cond_m1, "conditioning values, e.g. 0..12 or 1,3,5");
    cond->add_flag("--dist", cond_dist, "emit full distributions instead of summaries");
    cond->callback([&] { run_condition(cond_args, cond_rules, cond_m1, cond_dist, cond_out); });

    // phase
    auto* phase = app.add_subcommand("phase", "phase distribution p(phi) with peak locations");
    std::string phase_rule = "eq";
    int phase_k = -1;
    bool phase_gauss = false;
    add_common(phase, phase_args, phase_out);
    phase->add_option("--rule", phase_rule, "rule, e.g. eq:6 or eq (value from --k)");
    phase->add_option("--k,--m1", phase_k, "conditioning value for the rule");
    phase->add_flag("--gauss", phase_gauss, "add the large-k normal overlay column");
    phase->callback([&] { run_phase(phase_args, phase_rule, phase_k, phase_gauss, phase_out); });

    // wigner
    auto* wig = app.add_subcommand("wigner", "phase-space Wigner map of the input or a"
                                             " conditional state");
    std::string wig_rule;
    int wig_k = -1, wig_n = 101;
    double wig_extent = -1.0;
    add_common(wig, wigner_args, wigner_out);
    wig->add_option("--rule", wig_rule, "conditioning rule; omit for the input state");
    wig->add_option("--k,--m1", wig_k, "conditioning value for the rule");
    wig->add_option("--extent", wig_extent, "half-width of the grid (default: automatic)");
    wig->add_option("--n", wig_n, "nodes per axis")->check(CLI::Range(1, 4001));
    wig->callback([&] { run_wigner(wigner_args, wig_rule, wig_k, wig_extent, wig_n,
                                   wigner_out); });

    // correlate
    auto* corr = app.add_subcommand("correlate", "intensity correlation of the splitter arms");
    bool corr_equal = false, corr_joint = false;
    std::string corr_range = "0..20";
    int corr_steps = 41;
    add_common(corr, corr_args, corr_out, false);
    corr->add_flag("--alpha-eq-beta", corr_equal, "sweep alpha2 = beta2 over --mean-range");
    corr->add_option("--mean-range", corr_range, "total detected mean sweep, e.g. 0.5..20");
    corr->add_option("--steps", corr_steps, "sweep points");
    corr->add_flag("--joint", corr_joint, "add the Pearson of the quadrature joint");
    corr->callback([&] {
        if (!corr_equal &&
            (corr->count("--alpha2") == 0 || corr->count("--beta2") == 0))
            throw CLI::RequiresError("correlate", "--alpha2/--beta2 (or --alpha-eq-beta)");
        run_correlate(corr_args, corr_equal, corr_range, corr_steps, corr_joint, corr_out);
    });

    // nongauss
    auto* ng = app.add_subcommand("nongauss",
                                  "epsilon (and delta) sweeps over conditioning values");
    std::string ng_rules = "eq,neq,gt,leq", ng_m1 = "0..12";
    bool ng_delta = false;
    add_common(ng, ng_args, ng_out);
    std::string ng_alpha2_list;
    ng->add_option("--rules", ng_rules, "comma list of rules");
    ng->add_option("--m1", ng_m1, "conditioning values");
    ng->add_option("--alpha2-list", ng_alpha2_list,
                   "sweep several displacement intensities, e.g. 0.713,7.13,14.26,21.39");
    ng->add_flag("--delta", ng_delta, "add phase-sensitive delta columns");
    ng->callback([&] { run_nongauss(ng_args, ng_rules, ng_m1, ng_alpha2_list, ng_delta,
                                    ng_out); });

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo shot emulation and reconstruction");
    std::uint64_t sim_shots = 200000, sim_seed = 1;
    std::string sim_rules, sim_m1 = "0..8", sim_records;
    unsigned sim_threads = 0;
    add_common(sim, sim_args, sim_out);
    sim->add_option("--shots", sim_shots, "number of shots")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--rules", sim_rules, "conditional reconstruction rules (optional)");
    sim->add_option("--m1", sim_m1, "conditioning values for --rules");
    sim->add_option("--records", sim_records, "write raw shot records (CSV) to this path");
    sim->add_option("--threads", sim_threads, "worker threads (0 = hardware)");
    sim->callback([&] { run_simulate(sim_args, sim_shots, sim_seed, sim_rules, sim_m1,
                                     sim_records, sim_threads, sim_out); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config_file(app, std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11 vector parse wants reversed args
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return 2;
    } catch (const dphav::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
