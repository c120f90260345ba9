// qmet: bound tables, sensitivity/scaling scans, moment dumps, Monte Carlo
// simulation and feedback runs, decoherence scans, and oracle self-checks.
//
// Every run echoes its fully resolved configuration (including defaults and
// seed) into the output header; re-running that configuration reproduces the
// output byte for byte.  All floating-point values are printed as %.12e.
//
// Exit codes: 0 success, 1 usage error, 2 tolerance breach (oracle-check),
// 3 numeric degenerate input.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmet/bounds.hpp"
#include "qmet/exact_moments.hpp"
#include "qmet/oracle.hpp"
#include "qmet/protocol_sim.hpp"
#include "qmet/selfcheck.hpp"
#include "qmet/spin_model.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12e", x);
    return buf;
}

// Angles are accepted as plain radians ("0.7854") or pi-fractions
// ("pi/4", "-3pi/8", "0.5pi", "pi").
double parse_angle(const std::string& raw) {
    std::string s = raw;
    s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
    const auto pos = s.find("pi");
    if (pos == std::string::npos) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw CLI::ValidationError("angle", "cannot parse '" + raw + "'");
        return v;
    }
    std::string pre = s.substr(0, pos);
    std::string post = s.substr(pos + 2);
    double coef = 1.0;
    if (pre == "-")
        coef = -1.0;
    else if (!pre.empty())
        coef = std::stod(pre);
    double div = 1.0;
    if (!post.empty()) {
        if (post[0] != '/')
            throw CLI::ValidationError("angle", "cannot parse '" + raw + "'");
        div = std::stod(post.substr(1));
    }
    return coef * qmet::pi / div;
}

// "a:b" (count points) or "a:b:step"; endpoints may be pi-fractions.
struct Range {
    double lo = 0.0, hi = 0.0;
    std::optional<double> step;
};

Range parse_range(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 2 || parts.size() > 3)
        throw CLI::ValidationError("range", "expected lo:hi or lo:hi:step");
    Range r;
    r.lo = parse_angle(parts[0]);
    r.hi = parse_angle(parts[1]);
    if (parts.size() == 3) r.step = parse_angle(parts[2]);
    if (r.hi < r.lo) throw CLI::ValidationError("range", "hi < lo");
    return r;
}

std::vector<double> parse_levels(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    return v;
}

// J is accepted in scientific notation and rounded to the nearest
// half-integer; the rounded value is echoed in the header.
int parse_two_j(const std::string& s) {
    const double j = std::stod(s);
    const long long two_j = std::llround(2.0 * j);
    if (two_j < 1) throw CLI::ValidationError("J", "J >= 1/2 required");
    if (two_j > 100000000) throw CLI::ValidationError("J", "J too large");
    return int(two_j);
}

qmet::Axis parse_axis(const std::string& s) {
    if (s == "x" || s == "X") return qmet::Axis::X;
    if (s == "y" || s == "Y") return qmet::Axis::Y;
    throw CLI::ValidationError("axis", "expected x or y");
}

// JSON config file whose keys mirror flag names; explicit flags win.  Each
// subcommand registers its options here and values are back-filled after
// parsing for any option the user did not pass.
struct ConfigBinder {
    std::vector<std::function<void(const json&)>> appliers;

    template <typename T>
    void bind(CLI::Option* opt, const std::string& key, T& var) {
        appliers.push_back([opt, key, &var](const json& j) {
            if (opt->count() == 0 && j.contains(key))
                var = j.at(key).get<T>();
        });
    }

    void apply_file(const std::string& path) {
        if (path.empty()) return;
        std::ifstream in(path);
        if (!in) throw CLI::ValidationError("config", "cannot open " + path);
        json j = json::parse(in);
        for (auto& f : appliers) f(j);
    }
};

struct Output {
    std::string format = "json";  // csv | json
    std::string path;             // empty = stdout

    void add_flags(CLI::App* cmd, ConfigBinder& binder) {
        auto* f = cmd->add_option("--format", format, "Output format: csv or json");
        auto* o = cmd->add_option("--output", path, "Output path (default stdout)");
        binder.bind(f, "format", format);
        binder.bind(o, "output", path);
    }

    void emit(const std::string& subcommand, const json& config,
              const std::vector<std::string>& csv_header_extra,
              const std::string& csv_columns,
              const std::vector<std::string>& csv_rows,
              const json& body) const {
        std::ostringstream out;
        if (format == "csv") {
            out << "# qmet " << kVersion << "\n";
            out << "# subcommand " << subcommand << "\n";
            out << "# config " << config.dump() << "\n";
            for (const auto& line : csv_header_extra) out << "# " << line << "\n";
            out << csv_columns << "\n";
            for (const auto& row : csv_rows) out << row << "\n";
        } else {
            json doc;
            doc["version"] = kVersion;
            doc["subcommand"] = subcommand;
            doc["config"] = config;
            doc["result"] = body;
            out << doc.dump(2) << "\n";
        }
        if (path.empty()) {
            std::cout << out.str();
        } else {
            std::ofstream f(path);
            if (!f) throw CLI::ValidationError("output", "cannot write " + path);
            f << out.str();
        }
    }
};

json sensitivity_json(const qmet::SensitivityPoint& p) {
    json j;
    j["phi"] = fmt(p.phi);
    j["axis"] = std::string(qmet::to_string(p.axis));
    j["model"] = std::string(qmet::to_string(p.model));
    j["slope"] = fmt(p.slope);
    j["noise"] = fmt(p.noise);
    if (p.informative())
        j["delta_phi"] = fmt(*p.delta_phi);
    else
        j["delta_phi"] = "no-information";
    return j;
}

json moments_json(const qmet::MomentSet& m) {
    json j;
    j["jx"] = fmt(m.jx);
    j["jy"] = fmt(m.jy);
    j["jz"] = fmt(m.jz);
    j["jx2"] = fmt(m.jx2);
    j["jy2"] = fmt(m.jy2);
    j["jz2"] = fmt(m.jz2);
    j["jxjy_sym"] = fmt(m.jxjy_sym);
    j["jzjx_sym"] = fmt(m.jzjx_sym);
    j["jzjy_sym"] = fmt(m.jzjy_sym);
    j["var_x"] = fmt(m.var_x());
    j["var_y"] = fmt(m.var_y());
    j["var_z"] = fmt(m.var_z());
    return j;
}

// ---------------------------------------------------------------- bound ----

int cmd_bound(int k, long long n, const std::string& levels_s, double t,
              long long nu, bool no_self, const Output& out) {
    const auto spectrum = qmet::spectrum_stats(parse_levels(levels_s));
    const qmet::CouplingSpec coupling(k, n, !no_self);
    const qmet::ExperimentClock clock(0.0, t, nu);

    const auto extremes = qmet::extreme_eigenvalues(spectrum, coupling);
    const auto entangled = qmet::qcrb_entangled(extremes, clock);
    if (!entangled) throw std::domain_error("bound: coupling carries no information");

    json body;
    json cfg;
    cfg["k"] = k;
    cfg["n"] = n;
    cfg["levels"] = levels_s;
    cfg["t"] = t;
    cfg["nu"] = nu;
    cfg["self_interactions"] = !no_self;
    cfg["format"] = out.format;

    body["lambda_cap_max"] = fmt(extremes.lambda_cap_max);
    body["lambda_cap_min"] = fmt(extremes.lambda_cap_min);
    body["extremes_exact"] = extremes.exact;
    if (extremes.epsilon) body["epsilon"] = fmt(*extremes.epsilon);
    body["delta"] = fmt(extremes.delta);
    body["entangled_delta_gamma"] = fmt(*entangled);

    std::vector<std::string> rows;
    rows.push_back("lambda_cap_max," + fmt(extremes.lambda_cap_max));
    rows.push_back("lambda_cap_min," + fmt(extremes.lambda_cap_min));
    rows.push_back("entangled_delta_gamma," + fmt(*entangled));

    if (!no_self) {
        const auto opt = qmet::optimal_product_state(spectrum, coupling);
        const double scale = std::sqrt(double(nu)) * t;
        body["product_x_plus"] = fmt(opt.x_plus);
        body["product_x_minus"] = fmt(opt.x_minus);
        body["product_beta_opt"] = fmt(opt.beta_opt);
        body["product_variance"] = fmt(opt.variance);
        body["product_delta_gamma"] = fmt(opt.qcrb / scale);
        rows.push_back("product_delta_gamma," + fmt(opt.qcrb / scale));
    }

    out.emit("bound", cfg, {}, "quantity,value", rows, body);
    return 0;
}

// ---------------------------------------------------------- sensitivity ----

int cmd_sensitivity(const std::string& j_s, const std::string& beta_s,
                    const std::string& axis_s, const std::string& phi_s,
                    int points, const Output& out) {
    const int two_j = parse_two_j(j_s);
    const double j = 0.5 * two_j;
    const double beta = parse_angle(beta_s);
    const qmet::Axis axis = parse_axis(axis_s);
    const Range range = parse_range(phi_s);
    const double bound_line = 1.0 / (std::sqrt(2.0) * std::pow(j, 1.5));

    std::vector<double> phis;
    if (range.step) {
        for (double p = range.lo; p <= range.hi + 0.5 * *range.step;
             p += *range.step)
            phis.push_back(p);
    } else {
        if (points < 2) throw CLI::ValidationError("points", ">= 2 required");
        for (int i = 0; i < points; ++i)
            phis.push_back(range.lo +
                           (range.hi - range.lo) * i / double(points - 1));
    }

    json cfg;
    cfg["J"] = fmt(j);
    cfg["beta"] = fmt(beta);
    cfg["axis"] = axis_s;
    cfg["phi"] = phi_s;
    cfg["points"] = int(phis.size());
    cfg["format"] = out.format;

    auto cell = [](const std::optional<double>& v) {
        return v ? fmt(*v) : std::string("nan");
    };

    std::vector<std::string> rows;
    json jrows = json::array();
    for (double phi : phis) {
        const auto exact = qmet::sensitivity_exact(two_j, beta, phi, axis);
        const auto fr = qmet::fringe_model(two_j, beta, phi);
        const auto gauss = qmet::sensitivity_gaussian(two_j, beta, phi, axis);
        const auto fr_dp =
            axis == qmet::Axis::X ? fr.delta_phi_x : fr.delta_phi_y;
        rows.push_back(fmt(phi) + "," + cell(exact.delta_phi) + "," +
                       cell(fr_dp) + "," + cell(gauss.delta_phi) + "," +
                       fmt(bound_line));
        json r;
        r["phi"] = fmt(phi);
        r["delta_phi_exact"] = cell(exact.delta_phi);
        r["delta_phi_fringe"] = cell(fr_dp);
        r["delta_phi_gaussian"] = cell(gauss.delta_phi);
        r["bound_line"] = fmt(bound_line);
        jrows.push_back(r);
    }
    out.emit("sensitivity", cfg, {},
             "phi,delta_phi_exact,delta_phi_fringe,delta_phi_gaussian,"
             "bound_line",
             rows, jrows);
    return 0;
}

// -------------------------------------------------------------- scaling ----

int cmd_scaling(const std::string& axis_s, const std::string& j_lo_s,
                const std::string& j_hi_s, const std::string& beta_s,
                const std::string& rule_s, const Output& out) {
    const qmet::Axis axis = parse_axis(axis_s);
    const double j_lo = std::stod(j_lo_s);
    const double j_hi = std::stod(j_hi_s);

    qmet::OperatingRule rule = axis == qmet::Axis::Y
                                   ? qmet::OperatingRule::PhiZero
                                   : qmet::OperatingRule::CompromiseInvSqrt2J;
    if (rule_s == "phi-zero")
        rule = qmet::OperatingRule::PhiZero;
    else if (rule_s == "compromise")
        rule = qmet::OperatingRule::CompromiseInvSqrt2J;
    else if (rule_s != "auto")
        throw CLI::ValidationError("rule", "expected auto|phi-zero|compromise");

    json cfg;
    cfg["axis"] = axis_s;
    cfg["j_lo"] = fmt(j_lo);
    cfg["j_hi"] = fmt(j_hi);
    cfg["beta"] = beta_s.empty() ? "grid" : beta_s;
    cfg["rule"] = rule_s;
    cfg["format"] = out.format;

    std::vector<double> betas;
    const bool grid_mode = beta_s.empty();
    if (grid_mode) {
        // 181 interior points on (0, pi); i = 91 is exactly pi/2
        for (int i = 1; i <= 181; ++i) betas.push_back(i * qmet::pi / 182.0);
    } else {
        betas.push_back(parse_angle(beta_s));
    }

    std::vector<std::string> rows;
    json jrows = json::array();
    for (double beta : betas) {
        std::string xi;
        try {
            const auto r = qmet::scaling_exponent(beta, axis, j_lo, j_hi, rule);
            xi = fmt(r.xi);
        } catch (const std::domain_error&) {
            if (!grid_mode) throw;  // single-point request: degenerate input
            xi = "no-information";
        }
        rows.push_back(fmt(beta) + "," + xi);
        json r;
        r["beta"] = fmt(beta);
        r["xi"] = xi;
        jrows.push_back(r);
    }
    out.emit("scaling", cfg, {}, "beta,xi", rows, jrows);
    return 0;
}

// -------------------------------------------------------------- moments ----

int cmd_moments(const std::string& j_s, const std::string& beta_s,
                const std::string& phi_s, const std::string& model, int k,
                const Output& out) {
    const int two_j = parse_two_j(j_s);
    const double beta = parse_angle(beta_s);
    const double phi = parse_angle(phi_s);

    qmet::MomentSet m;
    if (model == "exact") {
        m = qmet::moments_exact(two_j, beta, phi);
    } else if (model == "fringe") {
        m = qmet::fringe_model(two_j, beta, phi).moments;
    } else if (model == "gaussian") {
        m = qmet::gaussian_envelope_moments(two_j, beta, phi);
    } else if (model == "oracle") {
        m = qmet::oracle::collective_moments(
            qmet::oracle::evolve(qmet::CoherentPreparation(two_j, beta), phi, k));
    } else if (model == "general-k") {
        m = qmet::general_k_model(two_j, beta, k, phi).moments;
    } else {
        throw CLI::ValidationError(
            "model", "expected exact|fringe|gaussian|oracle|general-k");
    }

    json cfg;
    cfg["J"] = fmt(0.5 * two_j);
    cfg["beta"] = fmt(beta);
    cfg["phi"] = fmt(phi);
    cfg["model"] = model;
    cfg["k"] = k;
    cfg["format"] = out.format;

    json body = moments_json(m);
    std::vector<std::string> rows;
    for (auto& [key, val] : body.items())
        rows.push_back(key + "," + val.get<std::string>());
    out.emit("moments", cfg, {}, "quantity,value", rows, body);
    return 0;
}

// ------------------------------------------------------------- simulate ----

int cmd_simulate(const std::string& protocol, const std::string& j_s,
                 const std::string& beta_s, const std::string& phi_true_s,
                 const std::string& phi_op_s, const std::string& axis_s,
                 long long nu, std::uint64_t seed, double gamma_t,
                 const std::string& mode_s, int batches, double seminorm_h,
                 double gamma, double t, const Output& out) {
    json cfg;
    cfg["protocol"] = protocol;
    cfg["nu"] = nu;
    cfg["seed"] = seed;
    cfg["batches"] = batches;
    cfg["format"] = out.format;

    json body;
    std::vector<std::string> rows;

    if (protocol == "estimate") {
        qmet::sim::TrialConfig tc;
        tc.two_j = parse_two_j(j_s);
        tc.beta = parse_angle(beta_s);
        tc.phi_true = parse_angle(phi_true_s);
        tc.phi_operating = parse_angle(phi_op_s);
        tc.axis = parse_axis(axis_s);
        tc.nu = nu;
        tc.seed = seed;
        tc.gamma_t_dephasing = gamma_t;
        if (mode_s == "exact")
            tc.sampling_mode = qmet::sim::SamplingMode::Exact;
        else if (mode_s == "gaussian")
            tc.sampling_mode = qmet::sim::SamplingMode::Gaussian;
        else if (mode_s == "auto")
            tc.sampling_mode = qmet::sim::SamplingMode::Auto;
        else
            throw CLI::ValidationError("mode", "expected exact|gaussian|auto");

        cfg["J"] = fmt(0.5 * tc.two_j);
        cfg["beta"] = fmt(tc.beta);
        cfg["phi_true"] = fmt(tc.phi_true);
        cfg["phi_op"] = fmt(tc.phi_operating);
        cfg["axis"] = axis_s;
        cfg["gamma_t"] = fmt(gamma_t);
        cfg["mode"] = mode_s;

        const auto outcome = qmet::sim::run_estimation(tc);
        body["phi_est"] = fmt(outcome.phi_est);
        body["empirical_delta_phi"] = fmt(outcome.empirical_delta_phi);
        body["sample_mean"] = fmt(outcome.sample_mean);
        body["sample_variance"] = fmt(outcome.sample_variance);
        body["slope_used"] = fmt(outcome.slope_used);
        body["fringe_warning"] = outcome.fringe_warning;
        if (batches > 0)
            body["rms_error"] = fmt(qmet::sim::empirical_rms_error(tc, batches));
    } else if (protocol == "cat") {
        cfg["seminorm_H"] = fmt(seminorm_h);
        cfg["gamma"] = fmt(gamma);
        cfg["t"] = fmt(t);
        auto rng = qmet::sim::substream(seed, 0);
        const auto outcome =
            qmet::sim::cat_protocol(seminorm_h, gamma, t, nu, rng);
        body["gamma_est"] = fmt(outcome.gamma_est);
        body["empirical_delta_gamma"] = fmt(outcome.empirical_delta_gamma);
        body["validity_warning"] = outcome.validity_warning;
        body["qcrb"] = fmt(1.0 / (std::sqrt(double(nu)) * t * seminorm_h));
        if (batches > 0)
            body["rms_error"] = fmt(qmet::sim::cat_rms_error(
                seminorm_h, gamma, t, nu, batches, seed));
    } else {
        throw CLI::ValidationError("protocol", "expected estimate|cat");
    }

    for (auto& [key, val] : body.items()) {
        if (val.is_string())
            rows.push_back(key + "," + val.get<std::string>());
        else
            rows.push_back(key + "," + val.dump());
    }
    out.emit("simulate", cfg, {}, "quantity,value", rows, body);
    return 0;
}

// ------------------------------------------------------------- feedback ----

int cmd_feedback(double f, long long nu, int bits,
                 const std::string& phi_true_s, const std::string& beta_s,
                 std::uint64_t seed, const Output& out) {
    qmet::sim::FeedbackConfig fc;
    fc.f = f;
    fc.nu = nu;
    fc.bits = bits;
    fc.phi_true = parse_angle(phi_true_s);
    fc.beta = parse_angle(beta_s);
    fc.seed = seed;

    json cfg;
    cfg["f"] = fmt(f);
    cfg["nu"] = nu;
    cfg["L"] = bits;
    cfg["phi_true"] = fmt(fc.phi_true);
    cfg["beta"] = fmt(fc.beta);
    cfg["seed"] = seed;
    cfg["format"] = out.format;

    const auto rec = qmet::sim::adaptive_feedback(fc);

    json body;
    json steps = json::array();
    std::vector<std::string> rows;
    for (const auto& s : rec.steps) {
        json js;
        js["l"] = s.l;
        js["J_l"] = fmt(s.j_l);
        js["delta_phi_l"] = fmt(s.delta_phi_l);
        js["estimate"] = fmt(s.estimate);
        js["residual"] = fmt(s.residual);
        js["clamped"] = s.clamped;
        js["zero_slope"] = s.zero_slope;
        js["fringe_flag"] = s.fringe_flag;
        steps.push_back(js);
        rows.push_back(std::to_string(s.l) + "," + fmt(s.j_l) + "," +
                       fmt(s.delta_phi_l) + "," + fmt(s.estimate) + "," +
                       fmt(s.residual) + "," + (s.zero_slope ? "1" : "0"));
    }
    body["steps"] = steps;
    body["phi_est"] = fmt(rec.phi_est);
    body["final_error"] = fmt(rec.final_error);
    body["target_precision"] = fmt(rec.target_precision);
    body["total_constituents"] = fmt(rec.total_constituents);
    body["closed_form_constituents"] =
        fmt(qmet::sim::feedback_resources_closed_form(f, nu, bits));

    out.emit("feedback", cfg,
             {"phi_est " + fmt(rec.phi_est),
              "final_error " + fmt(rec.final_error),
              "total_constituents " + fmt(rec.total_constituents)},
             "l,J_l,delta_phi_l,estimate,residual,zero_slope", rows, body);
    return 0;
}

// ------------------------------------------------------------- decohere ----

int cmd_decohere(const std::string& j_s, const std::string& beta_s,
                 double tau2, double total_time, const std::string& scan_s,
                 const Output& out) {
    const int two_j = parse_two_j(j_s);
    const double beta = parse_angle(beta_s);
    if (tau2 <= 0.0 || total_time <= 0.0)
        throw CLI::ValidationError("tau2/T", "must be positive");
    const qmet::DecoherenceSpec spec(1.0 / tau2, total_time);
    const Range range = parse_range(scan_s);
    if (!range.step) throw CLI::ValidationError("scan-t", "expected lo:hi:step");

    json cfg;
    cfg["J"] = fmt(0.5 * two_j);
    cfg["beta"] = fmt(beta);
    cfg["tau2"] = fmt(tau2);
    cfg["T"] = fmt(total_time);
    cfg["scan_t"] = scan_s;
    cfg["format"] = out.format;

    // nu = T/t at each scan point: delta_gamma = e^{t/tau2} base / sqrt(t T)
    const double j = 0.5 * two_j;
    const double s2b = std::fabs(std::sin(2.0 * beta));
    if (s2b == 0.0) throw std::domain_error("decohere: sin(2 beta) = 0");
    const double base = 1.0 / (std::sqrt(2.0) * std::pow(j, 1.5) * s2b);

    std::vector<std::string> rows;
    json jrows = json::array();
    double best_t = 0.0, best_dg = std::numeric_limits<double>::infinity();
    for (double t = range.lo; t <= range.hi + 0.5 * *range.step;
         t += *range.step) {
        if (t <= 0.0) continue;
        const double dg =
            std::exp(t / tau2) * base / std::sqrt(t * total_time);
        if (dg < best_dg) {
            best_dg = dg;
            best_t = t;
        }
        rows.push_back(fmt(t) + "," + fmt(total_time / t) + "," + fmt(dg));
        json r;
        r["t"] = fmt(t);
        r["nu"] = fmt(total_time / t);
        r["delta_gamma"] = fmt(dg);
        jrows.push_back(r);
    }

    const auto closed =
        qmet::decohered_sensitivity(two_j, beta, spec, best_t, 1);
    json body;
    body["scan"] = jrows;
    body["argmin_t"] = fmt(best_t);
    body["min_delta_gamma"] = fmt(best_dg);
    body["optimal_t_closed_form"] = fmt(closed.optimal_t);
    body["min_delta_gamma_closed_form"] = fmt(closed.delta_gamma_optimal);

    out.emit("decohere", cfg,
             {"argmin_t " + fmt(best_t), "min_delta_gamma " + fmt(best_dg),
              "optimal_t_closed_form " + fmt(closed.optimal_t),
              "min_delta_gamma_closed_form " + fmt(closed.delta_gamma_optimal)},
             "t,nu,delta_gamma", rows, body);
    return 0;
}

// --------------------------------------------------------- oracle-check ----

int cmd_oracle_check(int max_two_j, int grid, double tol, const Output& out) {
    if (max_two_j < 1 || max_two_j > qmet::oracle::kRotationBudgetTwoJ)
        throw CLI::ValidationError("max-2J", "out of range");
    if (grid < 2) throw CLI::ValidationError("grid", ">= 2 required");

    const auto rep = qmet::oracle_check(max_two_j, grid);

    json cfg;
    cfg["max_2J"] = max_two_j;
    cfg["grid"] = grid;
    cfg["tol"] = fmt(tol);
    cfg["format"] = out.format;

    json body;
    body["points"] = rep.points;
    body["max_rel_error_moments"] = fmt(rep.max_rel_moments);
    body["max_rel_error_sensitivity"] = fmt(rep.max_rel_sensitivity);
    body["worst_2J"] = rep.worst_two_j;
    body["worst_beta"] = fmt(rep.worst_beta);
    body["worst_phi"] = fmt(rep.worst_phi);
    body["pass"] = rep.max_rel() <= tol;

    std::vector<std::string> rows;
    for (auto& [key, val] : body.items()) {
        if (val.is_string())
            rows.push_back(key + "," + val.get<std::string>());
        else
            rows.push_back(key + "," + val.dump());
    }
    out.emit("oracle-check", cfg, {}, "quantity,value", rows, body);
    return rep.max_rel() <= tol ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qmet: nonlinear collective-spin metrology workbench"};
    app.require_subcommand(1);
    std::string config_path;

    // --- bound ---
    auto* bound = app.add_subcommand("bound", "Entangled and product bounds");
    ConfigBinder bb;
    int b_k = 2;
    long long b_n = 1000, b_nu = 1;
    std::string b_levels = "-0.5,0.5";
    double b_t = 1.0;
    bool b_no_self = false;
    Output b_out;
    bb.bind(bound->add_option("--k", b_k), "k", b_k);
    bb.bind(bound->add_option("--n", b_n), "n", b_n);
    bb.bind(bound->add_option("--levels", b_levels), "levels", b_levels);
    bb.bind(bound->add_option("--t", b_t), "t", b_t);
    bb.bind(bound->add_option("--nu", b_nu), "nu", b_nu);
    bb.bind(bound->add_flag("--no-self-interaction", b_no_self),
            "no_self_interaction", b_no_self);
    b_out.add_flags(bound, bb);
    bound->add_option("--config", config_path);

    // --- sensitivity ---
    auto* sens = app.add_subcommand("sensitivity", "delta_phi(phi) scan");
    ConfigBinder sb;
    std::string s_j = "200", s_beta = "pi/4", s_axis = "y",
                s_phi = "-pi/8:pi/8";
    int s_points = 201;
    Output s_out;
    sb.bind(sens->add_option("--J", s_j), "J", s_j);
    sb.bind(sens->add_option("--beta", s_beta), "beta", s_beta);
    sb.bind(sens->add_option("--axis", s_axis), "axis", s_axis);
    sb.bind(sens->add_option("--phi", s_phi), "phi", s_phi);
    sb.bind(sens->add_option("--points", s_points), "points", s_points);
    s_out.add_flags(sens, sb);
    sens->add_option("--config", config_path);

    // --- scaling ---
    auto* scal = app.add_subcommand("scaling", "Scaling exponent xi(beta)");
    ConfigBinder cb;
    std::string c_axis = "y", c_jlo = "1e5", c_jhi = "1e7", c_beta,
                c_rule = "auto";
    Output c_out;
    cb.bind(scal->add_option("--axis", c_axis), "axis", c_axis);
    cb.bind(scal->add_option("--j-lo", c_jlo), "j_lo", c_jlo);
    cb.bind(scal->add_option("--j-hi", c_jhi), "j_hi", c_jhi);
    cb.bind(scal->add_option("--beta", c_beta), "beta", c_beta);
    cb.bind(scal->add_option("--rule", c_rule), "rule", c_rule);
    c_out.add_flags(scal, cb);
    scal->add_option("--config", config_path);

    // --- moments ---
    auto* mom = app.add_subcommand("moments", "Moment table for one state");
    ConfigBinder mb;
    std::string m_j = "200", m_beta = "pi/4", m_phi = "0", m_model = "exact";
    int m_k = 2;
    Output m_out;
    mb.bind(mom->add_option("--J", m_j), "J", m_j);
    mb.bind(mom->add_option("--beta", m_beta), "beta", m_beta);
    mb.bind(mom->add_option("--phi", m_phi), "phi", m_phi);
    mb.bind(mom->add_option("--model", m_model), "model", m_model);
    mb.bind(mom->add_option("--k", m_k), "k", m_k);
    m_out.add_flags(mom, mb);
    mom->add_option("--config", config_path);

    // --- simulate ---
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimation run");
    ConfigBinder ib;
    std::string i_protocol = "estimate", i_j = "200", i_beta = "pi/4",
                i_phi_true = "0", i_phi_op = "0", i_axis = "y",
                i_mode = "auto";
    long long i_nu = 10000;
    std::uint64_t i_seed = 0;
    double i_gamma_t = 0.0, i_seminorm = 4.0, i_gamma = 0.1, i_t = 1.0;
    int i_batches = 0;
    Output i_out;
    ib.bind(sim->add_option("--protocol", i_protocol), "protocol", i_protocol);
    ib.bind(sim->add_option("--J", i_j), "J", i_j);
    ib.bind(sim->add_option("--beta", i_beta), "beta", i_beta);
    ib.bind(sim->add_option("--phi-true", i_phi_true), "phi_true", i_phi_true);
    ib.bind(sim->add_option("--phi-op", i_phi_op), "phi_op", i_phi_op);
    ib.bind(sim->add_option("--axis", i_axis), "axis", i_axis);
    ib.bind(sim->add_option("--nu", i_nu), "nu", i_nu);
    ib.bind(sim->add_option("--seed", i_seed), "seed", i_seed);
    ib.bind(sim->add_option("--gamma-t", i_gamma_t), "gamma_t", i_gamma_t);
    ib.bind(sim->add_option("--mode", i_mode), "mode", i_mode);
    ib.bind(sim->add_option("--batches", i_batches), "batches", i_batches);
    ib.bind(sim->add_option("--seminorm-H", i_seminorm), "seminorm_H",
            i_seminorm);
    ib.bind(sim->add_option("--gamma", i_gamma), "gamma", i_gamma);
    ib.bind(sim->add_option("--t", i_t), "t", i_t);
    i_out.add_flags(sim, ib);
    sim->add_option("--config", config_path);

    // --- feedback ---
    auto* fb = app.add_subcommand("feedback", "Adaptive bit-by-bit feedback");
    ConfigBinder fbb;
    double f_f = 8.0;
    long long f_nu = 100;
    int f_bits = 10;
    std::string f_phi_true = "0.005", f_beta = "pi/4";
    std::uint64_t f_seed = 0;
    Output f_out;
    fbb.bind(fb->add_option("--f", f_f), "f", f_f);
    fbb.bind(fb->add_option("--nu", f_nu), "nu", f_nu);
    fbb.bind(fb->add_option("--L", f_bits), "L", f_bits);
    fbb.bind(fb->add_option("--phi-true", f_phi_true), "phi_true", f_phi_true);
    fbb.bind(fb->add_option("--beta", f_beta), "beta", f_beta);
    fbb.bind(fb->add_option("--seed", f_seed), "seed", f_seed);
    f_out.add_flags(fb, fbb);
    fb->add_option("--config", config_path);

    // --- decohere ---
    auto* dec = app.add_subcommand("decohere", "Dephasing time scan");
    ConfigBinder db;
    std::string d_j = "1e4", d_beta = "pi/4", d_scan = "0.05:2.0:0.05";
    double d_tau2 = 1.0, d_total = 100.0;
    Output d_out;
    db.bind(dec->add_option("--J", d_j), "J", d_j);
    db.bind(dec->add_option("--beta", d_beta), "beta", d_beta);
    db.bind(dec->add_option("--tau2", d_tau2), "tau2", d_tau2);
    db.bind(dec->add_option("--T", d_total), "T", d_total);
    db.bind(dec->add_option("--scan-t", d_scan), "scan_t", d_scan);
    d_out.add_flags(dec, db);
    dec->add_option("--config", config_path);

    // --- oracle-check ---
    auto* oc = app.add_subcommand("oracle-check", "Closed form vs dense oracle");
    ConfigBinder ob;
    int o_max = 50, o_grid = 16;
    double o_tol = 1e-10;
    Output o_out;
    ob.bind(oc->add_option("--max-2J", o_max), "max_2J", o_max);
    ob.bind(oc->add_option("--grid", o_grid), "grid", o_grid);
    ob.bind(oc->add_option("--tol", o_tol), "tol", o_tol);
    o_out.add_flags(oc, ob);
    oc->add_option("--config", config_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (bound->parsed()) {
            bb.apply_file(config_path);
            return cmd_bound(b_k, b_n, b_levels, b_t, b_nu, b_no_self, b_out);
        }
        if (sens->parsed()) {
            sb.apply_file(config_path);
            return cmd_sensitivity(s_j, s_beta, s_axis, s_phi, s_points, s_out);
        }
        if (scal->parsed()) {
            cb.apply_file(config_path);
            return cmd_scaling(c_axis, c_jlo, c_jhi, c_beta, c_rule, c_out);
        }
        if (mom->parsed()) {
            mb.apply_file(config_path);
            return cmd_moments(m_j, m_beta, m_phi, m_model, m_k, m_out);
        }
        if (sim->parsed()) {
            ib.apply_file(config_path);
            return cmd_simulate(i_protocol, i_j, i_beta, i_phi_true, i_phi_op,
                                i_axis, i_nu, i_seed, i_gamma_t, i_mode,
                                i_batches, i_seminorm, i_gamma, i_t, i_out);
        }
        if (fb->parsed()) {
            fbb.apply_file(config_path);
            return cmd_feedback(f_f, f_nu, f_bits, f_phi_true, f_beta, f_seed,
                                f_out);
        }
        if (dec->parsed()) {
            db.apply_file(config_path);
            return cmd_decohere(d_j, d_beta, d_tau2, d_total, d_scan, d_out);
        }
        if (oc->parsed()) {
            ob.apply_file(config_path);
            return cmd_oracle_check(o_max, o_grid, o_tol, o_out);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "degenerate input: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
