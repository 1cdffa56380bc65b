#include "app.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lcurve/lcurve.hpp"

namespace lcurve::app {

namespace {

using json = nlohmann::ordered_json;

struct Flags {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::string data_path;
    std::string eta_grid;
    std::optional<std::uint64_t> seed;
    std::optional<int> r;
    std::optional<int> draws;
    std::optional<int> threads;
};

// Reads cfg[key], writing the default back so the embedded config is fully resolved.
template <class T>
T take(json& j, const char* key, const T& def)
{
    if (!j.contains(key) || j[key].is_null()) j[key] = def;
    return j[key].get<T>();
}

json& section(json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null()) j[key] = json::object();
    if (!j[key].is_object()) throw ConfigError(std::string("config: '") + key + "' must be an object");
    return j[key];
}

json parse_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

std::vector<double> parse_eta_grid(const std::string& spec)
{
    auto fail = [&] { return ConfigError("bad eta grid '" + spec + "' (use geom:a:b:n, lin:a:b:n or a,b,c)"); };
    std::vector<double> out;
    auto parts = [](const std::string& s, char sep) {
        std::vector<std::string> v;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, sep)) v.push_back(cell);
        return v;
    };
    try {
        if (spec.rfind("geom:", 0) == 0 || spec.rfind("lin:", 0) == 0) {
            const auto p = parts(spec, ':');
            if (p.size() != 4) throw fail();
            const double a = std::stod(p[1]), b = std::stod(p[2]);
            const int n = std::stoi(p[3]);
            if (n < 1 || !(a > 0.0) || !(b >= a)) throw fail();
            for (int i = 0; i < n; ++i) {
                const double u = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
                out.push_back(p[0] == "geom" ? a * std::pow(b / a, u) : a + (b - a) * u);
            }
        } else {
            for (const auto& c : parts(spec, ',')) out.push_back(std::stod(c));
        }
    } catch (const std::logic_error&) {
        throw fail();
    }
    if (out.empty()) throw fail();
    return out;
}

KernelSeries kernel_from(json& cfg, int d)
{
    json& k = section(cfg, "kernel");
    if (k.contains("series")) return user_series(d, k["series"].get<std::vector<double>>());
    const int depth = take(k, "depth", 3);
    const auto act = parse_activation(take<std::string>(k, "activation", "relu"));
    const auto kind = parse_kernel_kind(take<std::string>(k, "kind", "ntk"));
    const auto conv = parse_convention(take<std::string>(k, "convention", "fan_in"));
    const auto sw = take(k, "sigma_w2", std::vector<double>(static_cast<std::size_t>(depth) + 1, 1.0));
    const auto sb = take(k, "sigma_b2", std::vector<double>(static_cast<std::size_t>(depth) + 1, 1.0));
    const double width = take(k, "width", 1.0);
    const int Q = take(k, "Q", 32);
    return build_kernel_series(make_arch(depth, act, kind, sw, sb, d, conv, width), d, Q);
}

SpectralTarget target_from(json& cfg, int d, std::uint64_t seed)
{
    json& t = section(cfg, "target");
    const auto tseed = take<std::uint64_t>(t, "seed", derive_seed(seed, 1000));
    if (t.contains("ridge")) {
        const auto profile = t["ridge"].get<std::string>();
        const int lmax = take(t, "lmax", 12);
        const int nodes = take(t, "nodes", 2048);
        return project_ridge(make_ridge(d, profile, tseed), lmax, nodes);
    }
    return make_zonal(d, take(t, "w2", std::vector<double>{0.0, 0.5, 0.5}), tseed);
}

std::string fmt(double v)
{
    std::ostringstream s;
    s << std::setprecision(10) << v;
    return s.str();
}

struct Output {
    json doc;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> notes;
};

void emit(const Output& o, const json& cfg, std::uint64_t seed, const Flags& f, std::ostream& stdout_)
{
    std::ofstream file;
    if (!f.out_path.empty()) {
        file.open(f.out_path);
        if (!file) throw ConfigError("cannot write '" + f.out_path + "'");
    }
    std::ostream& out = f.out_path.empty() ? stdout_ : file;
    if (f.format == "json") {
        json doc = o.doc;
        doc["seed"] = seed;
        doc["config"] = cfg;
        out << doc.dump(2) << "\n";
        return;
    }
    out << "# seed: " << seed << "\n# config: " << cfg.dump() << "\n";
    for (const auto& n : o.notes) out << "# " << n << "\n";
    for (std::size_t i = 0; i < o.columns.size(); ++i) out << (i ? "," : "") << o.columns[i];
    out << "\n";
    for (const auto& r : o.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
    }
}

int threads_of(json& cfg) { return take(cfg, "threads", 1); }

Spectrum spectrum_from_config(json& cfg, int d, int r, double sigma2)
{
    if (cfg.contains("spectrum_file")) {
        json j = parse_json_file(cfg["spectrum_file"].get<std::string>());
        if (j.contains("spectrum")) j = j["spectrum"];
        Spectrum sp = spectrum_from_json(j.dump());
        check_spectrum(sp, std::numeric_limits<double>::quiet_NaN());
        return sp;
    }
    if (cfg.contains("spectrum")) {
        Spectrum sp = spectrum_from_json(cfg["spectrum"].dump());
        check_spectrum(sp, std::numeric_limits<double>::quiet_NaN());
        return sp;
    }
    const KernelSeries ks = kernel_from(cfg, d);
    return eigenvalues(trim(ks, r), sigma2, take(cfg, "lmax", r));
}

int cmd_spectrum(json& cfg, std::uint64_t seed, const Flags& f, std::ostream& out)
{
    const int d = take(cfg, "d", 50);
    const int r = take(cfg, "r", 3);
    const double sigma2 = take(cfg, "sigma2", 0.0);
    const KernelSeries ks = kernel_from(cfg, d);
    const int lmax = take(cfg, "lmax", r);
    const TrimmedKernel tk = trim(ks, r);
    const Spectrum sp = eigenvalues(tk, sigma2, lmax);
    double trace = 0.0;
    for (std::size_t l = 0; l < sp.lambda.size(); ++l) trace += sp.deg[l] * sp.lambda[l];
    Output o;
    o.doc["command"] = "spectrum";
    o.doc["kernel"] = json::parse(to_json(ks));
    o.doc["spectrum"] = json::parse(to_json(sp));
    o.doc["diagnostics"] = {{"sigma_r2", tk.sigma_r2},
                            {"trimmed_diagonal", tk.trimmed_diagonal()},
                            {"trace_sum", trace},
                            {"bound_ok", true},
                            {"discrepancy_estimate_N1000", discrepancy_estimate(tk, 1000)},
                            {"series_diagnostics", ks.diagnostics}};
    o.columns = {"l", "lambda", "deg", "kxx_over_deg"};
    for (std::size_t l = 0; l < sp.lambda.size(); ++l)
        o.rows.push_back({std::to_string(l), fmt(sp.lambda[l]), fmt(sp.deg[l]), fmt(sp.kxx / sp.deg[l])});
    o.notes = {"kxx: " + fmt(sp.kxx), "sigma_r2: " + fmt(tk.sigma_r2), "sigma2_total: " + fmt(sp.sigma2),
               "trace: " + fmt(trace) + " (trimmed diagonal " + fmt(tk.trimmed_diagonal()) + ")"};
    emit(o, cfg, seed, f, out);
    return ks.provenance && !ks.diagnostics.empty() ? invariant_violation : ok;
}

int cmd_curve(json& cfg, std::uint64_t seed, const Flags& f, std::ostream& out)
{
    const int d = take(cfg, "d", 50);
    const int r = take(cfg, "r", 3);
    const double sigma2 = take(cfg, "sigma2", 0.0);
    const Spectrum sp = spectrum_from_config(cfg, d, r, sigma2);
    const SpectralTarget tgt = target_from(cfg, sp.d, seed);
    const auto etas = parse_eta_grid(take<std::string>(cfg, "eta_grid", "geom:200:1000:17"));
    const double thr = take(cfg, "trust_threshold", 0.2);
    const auto pts = learning_curve(sp, tgt, etas, thr);
    Output o;
    o.doc["command"] = "curve";
    o.doc["spectrum"] = json::parse(to_json(sp));
    o.doc["target"] = json::parse(to_json(tgt));
    o.doc["points"] = json::array();
    o.columns = {"eta", "err_ek", "err_sl", "c_over_sigma2", "trusted"};
    for (const auto& p : pts) {
        o.doc["points"].push_back({{"eta", p.eta},
                                   {"err_ek", p.err_ek},
                                   {"err_sl", p.err_sl},
                                   {"c_over_sigma2", p.c_over_sigma2},
                                   {"trusted", p.trusted},
                                   {"per_degree", p.per_degree}});
        o.rows.push_back({fmt(p.eta), fmt(p.err_ek), fmt(p.err_sl), fmt(p.c_over_sigma2), p.trusted ? "true" : "false"});
    }
    emit(o, cfg, seed, f, out);
    return ok;
}

int cmd_verify(json& cfg, std::uint64_t seed, const Flags& f, std::ostream& out)
{
    const int d = take(cfg, "d", 50);
    const int r = take(cfg, "r", 3);
    const double sigma2 = take(cfg, "sigma2", 0.0);
    const KernelSeries ks = kernel_from(cfg, d);
    const TrimmedKernel tk = trim(ks, r);
    const Spectrum sp = eigenvalues(tk, sigma2, take(cfg, "lmax", r));
    const SpectralTarget tgt = target_from(cfg, d, seed);
    const auto etas = parse_eta_grid(take<std::string>(cfg, "eta_grid", "geom:200:1000:17"));
    const double thr = take(cfg, "trust_threshold", 0.2);
    json& v = section(cfg, "verify");
    int default_nmax = 1;
    while (poisson_eta_max(default_nmax) < etas.back()) ++default_nmax;
    const int nmax = take(v, "nmax", default_nmax);
    const std::string which = take<std::string>(v, "kernel", "exact");
    McOptions mo;
    mo.draws = take(v, "draws", 10);
    mo.test_points = take(v, "test_points", 2000);
    mo.seed = seed;
    mo.threads = threads_of(cfg);
    GprConfig gc;
    if (which == "exact") gc = gpr_config(ks, sigma2, true);
    else if (which == "series") gc = gpr_config(ks, sigma2, false);
    else if (which == "trimmed") gc = gpr_config(tk, sigma2);
    else throw ConfigError("verify.kernel must be exact, series or trimmed");
    const auto mc = mc_learning_curve(gc, tgt, nmax, mo);
    std::vector<double> means(mc.size());
    for (std::size_t n = 0; n < mc.size(); ++n) means[n] = mc[n].mean;
    Output o;
    o.doc["command"] = "verify";
    o.doc["kernel_id"] = gc.kernel_id;
    o.doc["jitter_max"] = mc.back().jitter_max;
    o.doc["points"] = json::array();
    o.columns = {"eta", "mc_poisson", "tail_weight", "mc_raw", "mc_raw_stderr", "err_ek", "err_sl", "c_over_sigma2", "trusted"};
    for (double eta : etas) {
        const PoissonAverage pa = poisson_average(means, eta);
        const auto& raw = mc[static_cast<std::size_t>(std::lround(eta))];
        const CurvePoint p = daee(sp, tgt, eta);
        const bool trusted = p.c_over_sigma2 <= thr;
        o.doc["points"].push_back({{"eta", eta},
                                   {"mc_poisson", pa.value},
                                   {"tail_weight", pa.tail_weight},
                                   {"mc_raw", raw.mean},
                                   {"mc_raw_stderr", raw.std_error},
                                   {"err_ek", p.err_ek},
                                   {"err_sl", p.err_sl},
                                   {"c_over_sigma2", p.c_over_sigma2},
                                   {"trusted", trusted}});
        o.rows.push_back({fmt(eta), fmt(pa.value), fmt(pa.tail_weight), fmt(raw.mean), fmt(raw.std_error), fmt(p.err_ek),
                          fmt(p.err_sl), fmt(p.c_over_sigma2), trusted ? "true" : "false"});
    }
    o.notes = {"oracle kernel: " + gc.kernel_id + ", noise " + fmt(gc.sigma2) + ", jitter " + fmt(mc.back().jitter_max)};
    emit(o, cfg, seed, f, out);
    return ok;
}

int cmd_renorm(json& cfg, std::uint64_t seed, const Flags& f, std::ostream& out)
{
    json& rc = section(cfg, "renorm");
    const auto scales = take(rc, "scales", std::vector<int>{1, 2, 3, 4, 5});
    const int N = take(rc, "N", 1000);
    McOptions mo;
    mo.draws = take(rc, "draws", 5);
    mo.test_points = take(rc, "test_points", 1000);
    mo.seed = seed;
    mo.threads = threads_of(cfg);
    FidelityReport rep;
    std::string source;
    if (rc.contains("data") && !rc["data"].get<std::string>().empty()) {
        source = rc["data"].get<std::string>();
        const Dataset ds = load_csv_dataset(source, take(rc, "target_cols", 1));
        cfg["d"] = static_cast<int>(ds.x.cols());
        const KernelSeries ks = kernel_from(cfg, static_cast<int>(ds.x.cols()));
        rep = renorm_fidelity(ks, scales, ds, N, mo);
    } else {
        source = "synthetic";
        const int d = take(cfg, "d", 50);
        const KernelSeries ks = kernel_from(cfg, d);
        rep = renorm_fidelity(ks, scales, target_from(cfg, d, seed), N, mo);
    }
    Output o;
    o.doc["command"] = "renorm-check";
    o.doc["source"] = source;
    o.doc["target_power"] = rep.target_power;
    o.doc["jitter_max"] = rep.jitter_max;
    o.doc["rows"] = json::array();
    o.columns = {"r", "sigma_r2", "gap", "gap_stderr", "relative", "discrepancy_estimate"};
    for (const auto& row : rep.rows) {
        o.doc["rows"].push_back({{"r", row.r},
                                 {"sigma_r2", row.sigma_r2},
                                 {"gap", row.gap},
                                 {"gap_stderr", row.gap_std_error},
                                 {"relative", row.relative},
                                 {"discrepancy_estimate", row.discrepancy_estimate}});
        o.rows.push_back({std::to_string(row.r), fmt(row.sigma_r2), fmt(row.gap), fmt(row.gap_std_error), fmt(row.relative),
                          fmt(row.discrepancy_estimate)});
    }
    o.notes = {"source: " + source, "target power: " + fmt(rep.target_power), "jitter: " + fmt(rep.jitter_max)};
    emit(o, cfg, seed, f, out);
    return ok;
}

int cmd_hyperopt(json& cfg, std::uint64_t seed, const Flags& f, std::ostream& out)
{
    ArchTemplate tm;
    tm.d = take(cfg, "d", 10);
    json& k = section(cfg, "kernel");
    tm.depth = take(k, "depth", 1);
    tm.activation = parse_activation(take<std::string>(k, "activation", "relu"));
    tm.kind = parse_kernel_kind(take<std::string>(k, "kind", "ntk"));
    tm.convention = parse_convention(take<std::string>(k, "convention", "fan_in"));
    tm.width = take(k, "width", 1.0);
    tm.Q = take(k, "Q", 32);
    const int r = take(cfg, "r", 3);
    json& h = section(cfg, "hyperopt");
    std::vector<double> ref;
    for (int l = 0; l <= tm.depth; ++l) {
        ref.push_back(std::sqrt(2.0));
        ref.push_back(0.05);
    }
    ref = take(h, "reference", ref);
    HyperBox box;
    if (h.contains("lower") || h.contains("upper")) {
        box.reference = ref;
        box.lower = h.at("lower").get<std::vector<double>>();
        box.upper = h.at("upper").get<std::vector<double>>();
        box.validate();
    } else {
        const auto sc = take(h, "box_scale", std::vector<double>{0.5, 1.5});
        if (sc.size() != 2) throw ConfigError("hyperopt.box_scale needs two entries");
        box = relative_box(ref, sc[0], sc[1]);
    }
    const int N = take(h, "N", 1000);
    OptimizeOptions oo;
    oo.restarts = take(h, "restarts", 8);
    oo.seed = derive_seed(seed, 2000);
    oo.threads = threads_of(cfg);
    RandomSearchOptions ro;
    ro.count = take(h, "random_draws", 21);
    ro.seed = derive_seed(seed, 3000);
    const SpectralTarget tgt = target_from(cfg, tm.d, seed);
    std::optional<McOptions> mo;
    if (!h.contains("oracle") || !h["oracle"].is_null()) {
        json& oc = section(h, "oracle");
        McOptions m;
        m.draws = take(oc, "draws", 5);
        m.test_points = take(oc, "test_points", 1000);
        m.seed = derive_seed(seed, 4000);
        m.threads = threads_of(cfg);
        mo = m;
    }
    ro.oracle = mo;
    const OptimizeResult res = optimize(tm, box, tgt, N, r, oo);
    std::vector<RankedEvaluation> table;
    table.push_back({"Typical", res.reference, mo ? std::optional(oracle_loss(tm, res.reference.sigma, tgt, N, *mo)) : std::nullopt});
    table.push_back({"Optimized", res.best, mo ? std::optional(oracle_loss(tm, res.best.sigma, tgt, N, *mo)) : std::nullopt});
    const auto ranked = random_search_baseline(tm, box, tgt, N, r, ro);
    for (const auto& row : summary_rows(ranked)) table.push_back(row);
    for (const auto& row : ranked) table.push_back(row);

    Output o;
    o.doc["command"] = "hyperopt";
    o.doc["evaluations"] = res.trace.size();
    o.doc["rows"] = json::array();
    o.columns = {"label", "predicted", "gpr_mean", "gpr_stderr", "sigma_r2"};
    for (int l = 1; l <= tm.depth + 1; ++l) {
        o.columns.push_back("sigma_w" + std::to_string(l));
        o.columns.push_back("sigma_b" + std::to_string(l));
    }
    for (const auto& row : table) {
        json jr{{"label", row.label},
                {"predicted", row.eval.predicted_loss},
                {"gpr_mean", row.gpr ? json(row.gpr->mean) : json(nullptr)},
                {"gpr_stderr", row.gpr ? json(row.gpr->std_error) : json(nullptr)},
                {"sigma_r2", row.eval.sigma_r2},
                {"sigma", row.eval.sigma}};
        o.doc["rows"].push_back(jr);
        std::vector<std::string> cells{row.label, fmt(row.eval.predicted_loss), row.gpr ? fmt(row.gpr->mean) : "",
                                       row.gpr ? fmt(row.gpr->std_error) : "", fmt(row.eval.sigma_r2)};
        for (double s : row.eval.sigma) cells.push_back(fmt(s));
        o.rows.push_back(std::move(cells));
    }
    emit(o, cfg, seed, f, out);
    return ok;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App cli{"Analytic and Monte-Carlo learning curves of wide fully-connected networks", "lcurve"};
    cli.require_subcommand(1);
    cli.fallthrough();
    Flags f;
    cli.add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cli.add_option("--seed", f.seed, "master seed");
    cli.add_option("--out", f.out_path, "output path (default stdout)");
    cli.add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cli.add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    cli.add_option("--r", f.r, "renormalization scale")->check(CLI::NonNegativeNumber);
    cli.add_option("--eta-grid", f.eta_grid, "geom:a:b:n, lin:a:b:n or a,b,c");
    cli.add_option("--draws", f.draws, "dataset draws")->check(CLI::PositiveNumber);
    cli.add_option("--data", f.data_path, "CSV dataset for renorm-check")->check(CLI::ExistingFile);
    auto* s_spec = cli.add_subcommand("spectrum", "kernel series and eigenvalue spectrum");
    auto* s_curve = cli.add_subcommand("curve", "predicted learning curve");
    auto* s_verify = cli.add_subcommand("verify", "Monte-Carlo learning curve with Poisson averaging");
    auto* s_renorm = cli.add_subcommand("renorm-check", "renormalized vs full kernel prediction gap");
    auto* s_hyper = cli.add_subcommand("hyperopt", "initialization-variance optimization");
    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    try {
        json cfg = f.config_path.empty() ? json::object() : parse_json_file(f.config_path);
        if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
        if (f.r) cfg["r"] = *f.r;
        if (!f.eta_grid.empty()) cfg["eta_grid"] = f.eta_grid;
        if (f.threads) cfg["threads"] = *f.threads;
        if (f.seed) cfg["seed"] = *f.seed;
        const auto seed = take<std::uint64_t>(cfg, "seed", 1);
        if (f.draws) {
            if (s_verify->parsed()) section(cfg, "verify")["draws"] = *f.draws;
            if (s_renorm->parsed()) section(cfg, "renorm")["draws"] = *f.draws;
            if (s_hyper->parsed()) section(section(cfg, "hyperopt"), "oracle")["draws"] = *f.draws;
        }
        if (!f.data_path.empty()) section(cfg, "renorm")["data"] = f.data_path;
        if (s_spec->parsed()) return cmd_spectrum(cfg, seed, f, out);
        if (s_curve->parsed()) return cmd_curve(cfg, seed, f, out);
        if (s_verify->parsed()) return cmd_verify(cfg, seed, f, out);
        if (s_renorm->parsed()) return cmd_renorm(cfg, seed, f, out);
        if (s_hyper->parsed()) return cmd_hyperopt(cfg, seed, f, out);
        return config_error;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << "\n";
        return invariant_violation;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return numeric_failure;
    } catch (const std::domain_error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return numeric_failure;
    } catch (const std::overflow_error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return numeric_failure;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
}

} // namespace lcurve::app
