// rome: command-line front end to the reconciliation library.
#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "manifest.hpp"
#include "rome/rome.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInternal = 1;

struct Failure {
    rome_status status;
    std::string message;
};

void check(rome_status s) {
    if (s != ROME_OK) throw Failure{s, rome_last_error()};
}

[[noreturn]] void invalid(const std::string& message) { throw Failure{ROME_ERR_VALIDATION, message}; }

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    T* get() const { return p; }
};

using HierarchyHandle = Handle<rome_hierarchy, rome_hierarchy_free>;
using TableHandle = Handle<rome_table, rome_table_free>;
using ResultHandle = Handle<rome_result, rome_result_free>;
using ReportHandle = Handle<rome_report, rome_report_free>;

const std::map<std::string, rome_loss> kLosses = {{"ls", ROME_LOSS_LS},
                                                  {"lad", ROME_LOSS_LAD},
                                                  {"huber", ROME_LOSS_HUBER},
                                                  {"lp", ROME_LOSS_LP},
                                                  {"quantile", ROME_LOSS_QUANTILE}};
const std::map<std::string, rome_cov> kCovs = {{"ols", ROME_COV_OLS},
                                               {"wlsv", ROME_COV_WLSV},
                                               {"wlss", ROME_COV_WLSS},
                                               {"sample", ROME_COV_SAMPLE},
                                               {"shrink", ROME_COV_SHRINK}};
const std::map<std::string, rome_method> kMethods = {
    {"bu", ROME_METHOD_BU}, {"mint", ROME_METHOD_MINT}, {"rome", ROME_METHOD_ROME}, {"combine", ROME_METHOD_COMBINE}};
const std::map<std::string, rome_pattern> kPatterns = {
    {"average", ROME_PATTERN_AVERAGE}, {"oneway", ROME_PATTERN_ONE_WAY}, {"twoway", ROME_PATTERN_TWO_WAY}};
const std::map<std::string, rome_init> kInits = {{"zero", ROME_INIT_ZERO}, {"base-projection", ROME_INIT_BASE_PROJECTION}};
const std::map<std::string, rome_lad_mode> kLadModes = {{"huber-approx", ROME_LAD_HUBER_APPROX},
                                                        {"perturbation", ROME_LAD_PERTURBATION}};
const std::map<std::string, rome_format> kFormats = {{"csv", ROME_FORMAT_CSV}, {"json", ROME_FORMAT_JSON}};

std::string format_number(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

/// Worker count: --threads (0 = all cores), capped by ROME_THREADS.
unsigned thread_budget(unsigned requested) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    if (const char* cap = std::getenv("ROME_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(cap, &end, 10);
        if (end == cap || *end != '\0' || v < 1) invalid("ROME_THREADS must be a positive integer");
        n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

void emit_report(const rome_report* report, rome_format format, const std::optional<std::string>& out,
                 rome_cli::RunManifest manifest) {
    if (!out) {
        char* text = nullptr;
        check(rome_report_to_string(report, format, &text));
        std::cout << text;
        rome_string_free(text);
        return;
    }
    check(rome_report_write(report, format, out->c_str()));
    manifest.outputs.push_back(*out);
    manifest.write(*out);
}

std::vector<int> parse_windows(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int w = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(w);
        } catch (const std::exception&) {
            invalid("--windows: '" + item + "' is not an integer");
        }
    }
    if (out.empty()) invalid("--windows: at least one window is required");
    return out;
}

// ---------------------------------------------------------------------------

struct ReconcileArgs {
    std::string hierarchy, forecasts, out;
    std::optional<std::string> residuals;
    std::string method = "rome", loss = "ls", cov = "ols", pattern = "average", init = "zero", lad_mode = "huber-approx";
    std::string format = "csv";
    std::optional<double> huber_k, shrink_lambda;
    double lp_p = 1.5, quantile_q = 0.5, kh = 1.0;
    double varsigma = 1e-8, epsilon = 1e-4;
    int omega_max = 1000;
};

int cmd_reconcile(const ReconcileArgs& a, const std::vector<std::string>& argv) {
    HierarchyHandle h;
    check(rome_hierarchy_load(a.hierarchy.c_str(), h.out()));
    TableHandle base, resid;
    check(rome_table_read_csv(a.forecasts.c_str(), base.out()));
    if (a.residuals) check(rome_table_read_csv(a.residuals->c_str(), resid.out()));

    rome_options o;
    rome_options_init(&o);
    o.method = kMethods.at(a.method);
    o.loss = kLosses.at(a.loss);
    o.cov = kCovs.at(a.cov);
    o.pattern = kPatterns.at(a.pattern);
    o.init = kInits.at(a.init);
    o.lad_mode = kLadModes.at(a.lad_mode);
    if (a.huber_k) o.huber_k = *a.huber_k;
    if (a.shrink_lambda) o.shrink_lambda = *a.shrink_lambda;
    o.lp_p = a.lp_p;
    o.quantile_q = a.quantile_q;
    o.kh = a.kh;
    o.varsigma = a.varsigma;
    o.epsilon = a.epsilon;
    o.omega_max = a.omega_max;
    if (a.method == "mint" && a.loss != "ls") invalid("--method mint only supports --loss ls");

    ResultHandle r;
    check(rome_reconcile(h.get(), base.get(), resid.get(), &o, r.out()));
    check(rome_table_write_csv(rome_result_forecasts(r.get()), a.out.c_str()));

    // Diagnostics sidecar, one row per horizon.
    const rome_table* f = rome_result_forecasts(r.get());
    std::string diag = "horizon,iterations,converged,objective,coherence\n";
    for (std::size_t k = 0; k < rome_result_horizons(r.get()); ++k) {
        diag += std::string(rome_table_col_label(f, k)) + "," + std::to_string(rome_result_iterations(r.get(), k)) + "," +
                (rome_result_converged(r.get(), k) ? "true" : "false") + "," +
                format_number(rome_result_objective(r.get(), k)) + "," + format_number(rome_result_coherence(r.get())) +
                "\n";
    }
    const std::string diag_path = a.out + ".diag.csv";
    {
        std::ofstream out(diag_path, std::ios::binary);
        if (!out) throw Failure{ROME_ERR_IO, "cannot write '" + diag_path + "'"};
        out << diag;
    }

    rome_cli::RunManifest m{argv, std::nullopt, {a.hierarchy, a.forecasts}, {a.out, diag_path}};
    if (a.residuals) m.inputs.push_back(*a.residuals);
    m.write(a.out);
    for (std::size_t k = 0; k < rome_result_horizons(r.get()); ++k) {
        if (!rome_result_converged(r.get(), k)) {
            std::cerr << "warning: horizon " << (k + 1) << " did not converge within --omega-max iterations\n";
        }
    }
    return kExitOk;
}

struct SimulateArgs {
    std::string design;
    int reps = 100;
    std::uint64_t seed = 1;
    std::string methods;
    std::optional<std::string> out, dist;
    std::optional<double> sigma, proportion, rho;
    std::optional<int> nb;
    unsigned threads = 0;
    std::string aggregate = "mean-of-pct", lad_mode = "huber-approx", format = "csv";
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
    rome_experiment_options o;
    rome_experiment_options_init(&o);
    o.design = a.design.c_str();
    if (a.dist) o.dist = a.dist->c_str();
    if (a.sigma) {
        if (*a.sigma <= 0.0) invalid("--sigma must be positive");
        o.sigma = *a.sigma;
    }
    if (a.nb) {
        if (*a.nb <= 0) invalid("--nb must be positive");
        o.bottom = *a.nb;
    }
    if (a.proportion) {
        if (*a.proportion <= 0.0) invalid("--proportion must lie in (0, 1)");
        o.proportion = *a.proportion;
    }
    if (a.rho) {
        if (*a.rho < 0.0) invalid("--rho must lie in [0, 1)");
        o.rho = *a.rho;
    }
    o.reps = a.reps;
    o.seed = a.seed;
    o.methods = a.methods.c_str();
    o.threads = thread_budget(a.threads);
    o.mean_of_pct = a.aggregate == "mean-of-pct";
    o.lad_mode = kLadModes.at(a.lad_mode);
    ReportHandle report;
    check(rome_simulate(&o, report.out()));
    emit_report(report.get(), kFormats.at(a.format), a.out, {argv, a.seed, {}, {}});
    return kExitOk;
}

struct EvaluateArgs {
    std::string hierarchy, forecasts, actuals;
    std::optional<std::string> base, out;
    std::string windows = "1,6,12", format = "csv";
};

int cmd_evaluate(const EvaluateArgs& a, const std::vector<std::string>& argv) {
    const auto windows = parse_windows(a.windows);
    HierarchyHandle h;
    check(rome_hierarchy_load(a.hierarchy.c_str(), h.out()));
    TableHandle f, act, base;
    check(rome_table_read_csv(a.forecasts.c_str(), f.out()));
    check(rome_table_read_csv(a.actuals.c_str(), act.out()));
    if (a.base) check(rome_table_read_csv(a.base->c_str(), base.out()));
    ReportHandle report;
    check(rome_evaluate(h.get(), f.get(), act.get(), base.get(), windows.data(), windows.size(), report.out()));
    rome_cli::RunManifest m{argv, std::nullopt, {a.hierarchy, a.forecasts, a.actuals}, {}};
    if (a.base) m.inputs.push_back(*a.base);
    emit_report(report.get(), kFormats.at(a.format), a.out, m);
    return kExitOk;
}

struct BenchArgs {
    std::string scenario = "fig1";
    int iters = 5;
    std::uint64_t seed = 1;
    std::optional<std::string> out;
    std::string format = "csv";
};

int cmd_bench(const BenchArgs& a, const std::vector<std::string>& argv) {
    if (a.iters < 1) invalid("--iters must be at least 1");
    ReportHandle report;
    check(rome_bench(a.scenario.c_str(), a.iters, a.seed, report.out()));
    emit_report(report.get(), kFormats.at(a.format), a.out, {argv, a.seed, {}, {}});
    return kExitOk;
}

template <class M>
auto member_of(const M& map) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : map) keys.push_back(k);
    return CLI::IsMember(keys);
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Coherent hierarchical forecast reconciliation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rome_version()));

    ReconcileArgs ra;
    auto* rec = app.add_subcommand("reconcile", "Reconcile base forecasts against a hierarchy");
    rec->add_option("--hierarchy", ra.hierarchy, "Hierarchy JSON file")->required();
    rec->add_option("--forecasts", ra.forecasts, "Base forecasts CSV (series x horizon)")->required();
    rec->add_option("--residuals", ra.residuals, "In-sample residuals CSV (series x time)");
    rec->add_option("--out", ra.out, "Reconciled forecasts CSV")->required();
    rec->add_option("--method", ra.method, "bu|mint|rome|combine")->check(member_of(kMethods))->capture_default_str();
    rec->add_option("--loss", ra.loss, "ls|lad|huber|lp|quantile")->check(member_of(kLosses))->capture_default_str();
    rec->add_option("--cov", ra.cov, "ols|wlsv|wlss|sample|shrink")->check(member_of(kCovs))->capture_default_str();
    rec->add_option("--pattern", ra.pattern, "Combination weights: average|oneway|twoway")
        ->check(member_of(kPatterns))
        ->capture_default_str();
    rec->add_option("--huber-k", ra.huber_k, "Huber threshold (default 1.345 x pooled residual RMS)")
        ->check(CLI::PositiveNumber);
    rec->add_option("--lp-p", ra.lp_p, "Exponent for --loss lp")->capture_default_str();
    rec->add_option("--quantile-q", ra.quantile_q, "Level for --loss quantile")->capture_default_str();
    rec->add_option("--shrink-lambda", ra.shrink_lambda, "Fixed shrinkage intensity in [0,1]")->check(CLI::Range(0.0, 1.0));
    rec->add_option("--kh", ra.kh, "Scale constant of the covariance design")->capture_default_str();
    rec->add_option("--varsigma", ra.varsigma, "LQA perturbation")->capture_default_str();
    rec->add_option("--epsilon", ra.epsilon, "Convergence tolerance")->capture_default_str();
    rec->add_option("--omega-max", ra.omega_max, "Iteration cap")->capture_default_str();
    rec->add_option("--init", ra.init, "zero|base-projection")->check(member_of(kInits))->capture_default_str();
    rec->add_option("--lad-mode", ra.lad_mode, "huber-approx|perturbation")->check(member_of(kLadModes))->capture_default_str();

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Run a seeded simulation design and report percentage changes");
    sim->add_option("--design", sa.design, "nongaussian|efficiency|proportion|correlation|complexity")->required();
    sim->add_option("--reps", sa.reps, "Replications per cell")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
    sim->add_option("--methods", sa.methods, "Comma list: bu, all, combine, <loss>, <loss>-<cov>, combine-<pattern>[-<cov>]");
    sim->add_option("--out", sa.out, "Report path (stdout when absent)");
    sim->add_option("--dist", sa.dist, "nongaussian: mixture|t|cauchy");
    sim->add_option("--sigma", sa.sigma, "efficiency: single sigma cell");
    sim->add_option("--nb", sa.nb, "efficiency/complexity: single bottom-count cell");
    sim->add_option("--proportion", sa.proportion, "proportion: single irregular share");
    sim->add_option("--rho", sa.rho, "correlation: single rho cell");
    sim->add_option("--threads", sa.threads, "Worker threads, 0 = all cores (capped by ROME_THREADS)");
    sim->add_option("--aggregate", sa.aggregate, "mean-of-pct|pct-of-mean")
        ->check(CLI::IsMember({"mean-of-pct", "pct-of-mean"}))
        ->capture_default_str();
    sim->add_option("--lad-mode", sa.lad_mode, "huber-approx|perturbation")->check(member_of(kLadModes))->capture_default_str();

    EvaluateArgs ea;
    auto* ev = app.add_subcommand("evaluate", "RMSE per hierarchy level over horizon windows");
    ev->add_option("--hierarchy", ea.hierarchy, "Hierarchy JSON file")->required();
    ev->add_option("--forecasts", ea.forecasts, "Forecasts CSV")->required();
    ev->add_option("--actuals", ea.actuals, "Actuals CSV")->required();
    ev->add_option("--base", ea.base, "Base forecasts CSV for percentage changes");
    ev->add_option("--windows", ea.windows, "Comma list of horizon windows")->capture_default_str();
    ev->add_option("--out", ea.out, "Report path (stdout when absent)");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Time every loss x covariance design on one scenario");
    bench->add_option("--scenario", ba.scenario, "fig1 or a simulation design name")->capture_default_str();
    bench->add_option("--iters", ba.iters, "Repeats per method")->capture_default_str();
    bench->add_option("--seed", ba.seed, "Seed")->capture_default_str();
    bench->add_option("--out", ba.out, "Report path (stdout when absent)");

    for (auto* sub : {sim, ev, bench}) {
        std::string* fmt = sub == sim ? &sa.format : sub == ev ? &ea.format : &ba.format;
        sub->add_option("--format", *fmt, "csv|json")->check(member_of(kFormats))->capture_default_str();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*rec) return cmd_reconcile(ra, args);
        if (*sim) return cmd_simulate(sa, args);
        if (*ev) return cmd_evaluate(ea, args);
        if (*bench) return cmd_bench(ba, args);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        switch (f.status) {
            case ROME_ERR_VALIDATION:
            case ROME_ERR_IO: return kExitValidation;
            case ROME_ERR_NUMERIC: return kExitNumeric;
            default: return kExitInternal;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
