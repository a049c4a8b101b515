#include "rome/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "rome/errors.hpp"
#include "rome/evaluate.hpp"
#include "rome/table_io.hpp"

namespace rome {

// ---------------------------------------------------------------------------
// Error distributions

double draw_error(const ErrorSpec& spec, std::mt19937_64& rng) {
    switch (spec.kind) {
        case ErrorKind::Gaussian:
            return std::normal_distribution<double>(0.0, 1.0)(rng);
        case ErrorKind::MixtureNormal: {
            const bool narrow = std::bernoulli_distribution(spec.mix_weight)(rng);
            const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
            return z * (narrow ? spec.mix_sd_narrow : spec.mix_sd_wide);
        }
        case ErrorKind::StudentT:
            return std::student_t_distribution<double>(spec.dof)(rng);
        case ErrorKind::Cauchy:
            return std::cauchy_distribution<double>(spec.location, spec.scale)(rng);
    }
    return 0.0;
}

std::string to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Gaussian: return "gaussian";
        case ErrorKind::MixtureNormal: return "mixture";
        case ErrorKind::StudentT: return "t";
        case ErrorKind::Cauchy: return "cauchy";
    }
    return "?";
}

ErrorKind error_kind_from_string(const std::string& name) {
    if (name == "gaussian" || name == "normal") return ErrorKind::Gaussian;
    if (name == "mixture") return ErrorKind::MixtureNormal;
    if (name == "t" || name == "student-t") return ErrorKind::StudentT;
    if (name == "cauchy") return ErrorKind::Cauchy;
    throw ValidationError("unknown error distribution '" + name + "' (expected mixture|t|cauchy|gaussian)");
}

// ---------------------------------------------------------------------------
// Data generation

void validate(const ScenarioSpec& spec) {
    const std::size_t nb = spec.hierarchy.bottom_order.size();
    if (spec.alpha.size() != nb || spec.sigma.size() != nb || spec.errors.size() != nb) {
        throw ValidationError("scenario parameters must have one entry per bottom series");
    }
    for (std::size_t i = 0; i < nb; ++i) {
        if (!(std::abs(spec.alpha[i]) < 1.0)) throw ValidationError("AR coefficients must satisfy |alpha| < 1");
        if (!(spec.sigma[i] >= 0.0)) throw ValidationError("scales sigma must be non-negative");
        const auto& e = spec.errors[i];
        if (e.kind == ErrorKind::MixtureNormal &&
            !(e.mix_weight >= 0.0 && e.mix_weight <= 1.0 && e.mix_sd_narrow > 0.0 && e.mix_sd_wide > 0.0)) {
            throw ValidationError("invalid mixture-normal parameters");
        }
        if (e.kind == ErrorKind::StudentT && !(e.dof > 0.0)) throw ValidationError("t degrees of freedom must be positive");
        if (e.kind == ErrorKind::Cauchy && !(e.scale > 0.0)) throw ValidationError("Cauchy scale must be positive");
    }
    if (!(spec.corr_rho >= 0.0 && spec.corr_rho < 1.0)) throw ValidationError("correlation base must lie in [0, 1)");
    if (spec.t_train < 1 || spec.horizon < 1 || spec.t_train + spec.horizon != spec.t_total) {
        throw ValidationError("t_train + horizon must equal t_total");
    }
    if (spec.burn_in < 0) throw ValidationError("burn-in must be non-negative");
}

SimPanel generate_panel(const ScenarioSpec& spec, const Hierarchy& h, std::uint64_t rep_seed) {
    validate(spec);
    const std::size_t nb = h.bottom_count();
    if (nb != spec.alpha.size()) throw ValidationError("scenario does not match hierarchy");

    std::vector<std::size_t> gaussian;
    for (std::size_t i = 0; i < nb; ++i) {
        if (spec.errors[i].kind == ErrorKind::Gaussian) gaussian.push_back(i);
    }
    const auto g = static_cast<Eigen::Index>(gaussian.size());
    Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(g, g);
    if (g > 1 && spec.corr_rho > 0.0) {
        Eigen::MatrixXd corr(g, g);
        for (Eigen::Index a = 0; a < g; ++a) {
            for (Eigen::Index b = 0; b < g; ++b) {
                const auto lag = static_cast<double>(gaussian[static_cast<std::size_t>(a)] > gaussian[static_cast<std::size_t>(b)]
                                                         ? gaussian[static_cast<std::size_t>(a)] - gaussian[static_cast<std::size_t>(b)]
                                                         : gaussian[static_cast<std::size_t>(b)] - gaussian[static_cast<std::size_t>(a)]);
                corr(a, b) = std::pow(spec.corr_rho, lag);
            }
        }
        Eigen::LLT<Eigen::MatrixXd> llt(corr);
        if (llt.info() != Eigen::Success) throw NumericError("error correlation matrix is not positive definite");
        chol = llt.matrixL();
    }

    std::mt19937_64 rng(rep_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto nbi = static_cast<Eigen::Index>(nb);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(nbi);
    Eigen::VectorXd eps(nbi);
    Eigen::VectorXd z(g);
    Eigen::MatrixXd bottom(nbi, spec.t_total);
    const int steps = spec.burn_in + spec.t_total;
    for (int t = 0; t < steps; ++t) {
        for (Eigen::Index a = 0; a < g; ++a) z(a) = normal(rng);
        const Eigen::VectorXd zc = chol * z;
        for (Eigen::Index a = 0; a < g; ++a) eps(static_cast<Eigen::Index>(gaussian[static_cast<std::size_t>(a)])) = zc(a);
        for (std::size_t i = 0; i < nb; ++i) {
            if (spec.errors[i].kind != ErrorKind::Gaussian) eps(static_cast<Eigen::Index>(i)) = draw_error(spec.errors[i], rng);
        }
        for (std::size_t i = 0; i < nb; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            state(k) = spec.alpha[i] * state(k) + spec.sigma[i] * eps(k);
        }
        if (t >= spec.burn_in) bottom.col(t - spec.burn_in) = state;
    }

    SimPanel panel;
    panel.y = h.summing() * bottom;
    panel.y.bottomRows(nbi) = bottom;
    panel.t_train = spec.t_train;
    panel.horizon = spec.horizon;
    return panel;
}

// ---------------------------------------------------------------------------
// Base forecasts

BaseFit fit_base_forecaster(std::span<const double> train, int horizon) {
    if (train.size() < 20) throw ValidationError("base forecaster needs at least 20 training points");
    if (horizon < 1) throw ValidationError("horizon must be positive");
    const std::size_t m = train.size() - 1;
    double mx = 0.0, mz = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        mx += train[t];
        mz += train[t + 1];
    }
    mx /= static_cast<double>(m);
    mz /= static_cast<double>(m);
    double sxx = 0.0, sxz = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        sxx += (train[t] - mx) * (train[t] - mx);
        sxz += (train[t] - mx) * (train[t + 1] - mz);
    }

    BaseFit fit;
    if (sxx <= 1e-14 * (1.0 + mx * mx) * static_cast<double>(m)) {
        fit.slope = 0.0;
    } else {
        fit.slope = sxz / sxx;
    }
    if (std::abs(fit.slope) >= kUnitRootClamp) {
        fit.slope = std::copysign(kUnitRootClamp, fit.slope);
        fit.clamped = true;
    }
    fit.intercept = mz - fit.slope * mx;

    fit.residuals.resize(static_cast<Eigen::Index>(m));
    for (std::size_t t = 0; t < m; ++t) {
        fit.residuals(static_cast<Eigen::Index>(t)) = train[t + 1] - (fit.intercept + fit.slope * train[t]);
    }
    fit.forecasts.resize(horizon);
    double last = train.back();
    for (int k = 0; k < horizon; ++k) {
        last = fit.intercept + fit.slope * last;
        fit.forecasts(k) = last;
    }
    return fit;
}

BaseForecastSet fit_base_forecasts(const Eigen::MatrixXd& train, int horizon, int* clamped) {
    BaseForecastSet set;
    set.yhat.resize(train.rows(), horizon);
    ResidualPanel panel;
    panel.residuals.resize(train.rows(), train.cols() - 1);
    int n_clamped = 0;
    std::vector<double> row(static_cast<std::size_t>(train.cols()));
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
        for (Eigen::Index t = 0; t < train.cols(); ++t) row[static_cast<std::size_t>(t)] = train(i, t);
        const BaseFit fit = fit_base_forecaster(row, horizon);
        set.yhat.row(i) = fit.forecasts.transpose();
        panel.residuals.row(i) = fit.residuals.transpose();
        n_clamped += fit.clamped ? 1 : 0;
    }
    set.residuals = std::move(panel);
    if (clamped != nullptr) *clamped = n_clamped;
    return set;
}

double pooled_sigma(const ResidualPanel& panel) {
    const auto count = static_cast<double>(panel.residuals.size());
    if (count == 0) throw ValidationError("empty residual panel");
    return std::sqrt(panel.residuals.squaredNorm() / count);
}

HierarchySpec figure1_hierarchy() {
    HierarchySpec spec;
    spec.levels = {"L2", "L1", "L0"};
    spec.children = {{"L2-1", {"L1-1", "L1-2"}},
                     {"L1-1", {"L0-1", "L0-2"}},
                     {"L1-2", {"L0-3", "L0-4", "L0-5", "L0-6"}}};
    spec.bottom_order = {"L0-1", "L0-2", "L0-3", "L0-4", "L0-5", "L0-6"};
    return spec;
}

// ---------------------------------------------------------------------------
// Experiments

std::string to_string(Design d) {
    switch (d) {
        case Design::NonGaussian: return "nongaussian";
        case Design::Efficiency: return "efficiency";
        case Design::Proportion: return "proportion";
        case Design::Correlation: return "correlation";
        case Design::Complexity: return "complexity";
    }
    return "?";
}

Design design_from_string(const std::string& name) {
    if (name == "nongaussian") return Design::NonGaussian;
    if (name == "efficiency") return Design::Efficiency;
    if (name == "proportion") return Design::Proportion;
    if (name == "correlation") return Design::Correlation;
    if (name == "complexity") return Design::Complexity;
    throw ValidationError("unknown design '" + name +
                          "' (expected nongaussian|efficiency|proportion|correlation|complexity)");
}

std::string MethodSpec::method_label() const {
    switch (kind) {
        case Kind::BottomUp: return "bu";
        case Kind::Rome: return "rome";
        case Kind::Combine: return "combine-" + to_string(pattern);
    }
    return "?";
}

std::string MethodSpec::loss_label() const {
    switch (kind) {
        case Kind::BottomUp: return "-";
        case Kind::Rome: return to_string(loss);
        case Kind::Combine: return "ls+lad";
    }
    return "?";
}

std::string MethodSpec::cov_label() const { return kind == Kind::BottomUp ? "-" : to_string(cov); }

namespace {

const std::vector<LossKind> kExperimentLosses = {LossKind::LS, LossKind::LAD, LossKind::Huber};
const std::vector<CombinePattern> kPatterns = {CombinePattern::Average, CombinePattern::OneWay, CombinePattern::TwoWay};

std::vector<CovKind> design_covs(Design design) {
    if (design == Design::Complexity) return {CovKind::OLS, CovKind::WLSv, CovKind::WLSs, CovKind::Shrink};
    return {CovKind::OLS, CovKind::WLSv, CovKind::WLSs, CovKind::Sample, CovKind::Shrink};
}

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, sep)) {
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt_param(double v) { return format_double(v); }

}  // namespace

std::vector<MethodSpec> parse_methods(const std::string& list, Design design) {
    const auto covs = design_covs(design);
    std::vector<MethodSpec> out;
    auto add = [&out](MethodSpec m) {
        auto same = [&m](const MethodSpec& o) {
            return o.kind == m.kind && o.loss == m.loss && o.cov == m.cov && o.pattern == m.pattern;
        };
        if (std::none_of(out.begin(), out.end(), same)) out.push_back(m);
    };
    auto add_all = [&] {
        for (auto loss : kExperimentLosses) {
            for (auto cov : covs) add({MethodSpec::Kind::Rome, loss, cov});
        }
        add({MethodSpec::Kind::BottomUp});
    };
    const auto tokens = split_list(list, ',');
    if (tokens.empty()) {
        add_all();
        return out;
    }
    for (const auto& token : tokens) {
        if (token == "all") {
            add_all();
            continue;
        }
        if (token == "bu") {
            add({MethodSpec::Kind::BottomUp});
            continue;
        }
        const auto parts = split_list(token, '-');
        if (parts.empty()) throw ValidationError("empty method token");
        if (parts[0] == "combine") {
            std::vector<CombinePattern> patterns = kPatterns;
            std::vector<CovKind> pcovs = covs;
            if (parts.size() >= 2) patterns = {combine_pattern_from_string(parts[1])};
            if (parts.size() >= 3) pcovs = {cov_kind_from_string(parts[2])};
            if (parts.size() > 3) throw ValidationError("bad method token '" + token + "'");
            for (auto p : patterns) {
                for (auto c : pcovs) add({MethodSpec::Kind::Combine, LossKind::LS, c, p});
            }
            continue;
        }
        const LossKind loss = loss_kind_from_string(parts[0]);
        if (parts.size() == 1) {
            for (auto cov : covs) add({MethodSpec::Kind::Rome, loss, cov});
        } else if (parts.size() == 2) {
            add({MethodSpec::Kind::Rome, loss, cov_kind_from_string(parts[1])});
        } else {
            throw ValidationError("bad method token '" + token + "'");
        }
    }
    return out;
}

std::vector<int> experiment_windows(int horizon) {
    std::vector<int> out;
    for (int w : {1, 6, 12}) {
        if (w <= horizon) out.push_back(w);
    }
    if (out.empty() || out.back() != horizon) out.push_back(horizon);
    return out;
}

std::vector<ExperimentCell> experiment_cells(const ExperimentConfig& cfg) {
    const auto& o = cfg.overrides;
    std::vector<ExperimentCell> cells;
    switch (cfg.design) {
        case Design::NonGaussian: {
            std::vector<std::string> dists = {"mixture", "t", "cauchy"};
            if (o.dist) dists = {to_string(error_kind_from_string(*o.dist))};
            for (std::size_t i = 0; i < dists.size(); ++i) {
                cells.push_back({"dist=" + dists[i], static_cast<double>(error_kind_from_string(dists[i]))});
            }
            break;
        }
        case Design::Efficiency: {
            if (o.sigma && o.bottom) throw ValidationError("efficiency design takes either --sigma or --nb, not both");
            std::vector<double> sigmas = {0.5, 1.0, 1.5, 2.0, 3.0};
            std::vector<int> bottoms = {10, 20, 30, 40, 50};
            if (o.sigma) {
                if (!(*o.sigma > 0.0)) throw ValidationError("sigma must be positive");
                sigmas = {*o.sigma};
                bottoms.clear();
            }
            if (o.bottom) {
                if (*o.bottom < 10 || *o.bottom % 5 != 0) throw ValidationError("efficiency n_b must be a multiple of 5, >= 10");
                bottoms = {*o.bottom};
                sigmas.clear();
            }
            for (double s : sigmas) cells.push_back({"sigma=" + fmt_param(s), s});
            for (int b : bottoms) cells.push_back({"nb=" + std::to_string(b), static_cast<double>(-b)});
            break;
        }
        case Design::Proportion: {
            std::vector<double> props;
            for (int p = 1; p <= 9; ++p) props.push_back(p / 10.0);
            if (o.proportion) {
                if (!(*o.proportion > 0.0 && *o.proportion < 1.0)) throw ValidationError("proportion must lie in (0, 1)");
                props = {*o.proportion};
            }
            for (double p : props) cells.push_back({"proportion=" + fmt_param(p), p});
            break;
        }
        case Design::Correlation: {
            std::vector<double> rhos;
            for (int r = 0; r <= 9; ++r) rhos.push_back(r / 10.0);
            if (o.rho) {
                if (!(*o.rho >= 0.0 && *o.rho < 1.0)) throw ValidationError("rho must lie in [0, 1)");
                rhos = {*o.rho};
            }
            for (double r : rhos) cells.push_back({"rho=" + fmt_param(r), r});
            break;
        }
        case Design::Complexity: {
            std::vector<int> bottoms = {20, 40, 60, 80, 100, 120};
            if (o.bottom) {
                if (*o.bottom < 20 || *o.bottom % 10 != 0) throw ValidationError("complexity n_b must be a multiple of 10, >= 20");
                bottoms = {*o.bottom};
            }
            for (int b : bottoms) cells.push_back({"nb=" + std::to_string(b), static_cast<double>(b)});
            break;
        }
    }
    return cells;
}

namespace {

// Keyed on the cell's parameter string, so a single-cell run reproduces that cell of the full grid.
std::uint64_t derive_seed(std::uint64_t master, const std::string& cell, std::size_t rep, std::uint32_t stream) {
    std::uint32_t key = 2166136261u;  // FNV-1a
    for (unsigned char ch : cell) key = (key ^ ch) * 16777619u;
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32), key,
                      static_cast<std::uint32_t>(rep), stream};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

ErrorKind random_irregular(std::mt19937_64& rng) {
    static const ErrorKind kinds[] = {ErrorKind::MixtureNormal, ErrorKind::StudentT, ErrorKind::Cauchy};
    return kinds[std::uniform_int_distribution<int>(0, 2)(rng)];
}

ScenarioSpec base_scenario(HierarchySpec hs, double alpha, double sigma, double rho) {
    ScenarioSpec s;
    const std::size_t nb = hs.bottom_order.size();
    s.hierarchy = std::move(hs);
    s.alpha.assign(nb, alpha);
    s.sigma.assign(nb, sigma);
    s.errors.assign(nb, ErrorSpec::of(ErrorKind::Gaussian));
    s.corr_rho = rho;
    return s;
}

std::vector<EvalGroup> level_groups(const Hierarchy& h) {
    return {{"bottom", h.bottom_range().indices()},
            {"aggregated", h.aggregate_range().indices()},
            {"whole", IndexRange{0, h.size()}.indices()}};
}

}  // namespace

Replication prepare_replication(const ExperimentConfig& cfg, std::size_t cell_index, std::size_t rep) {
    const auto cells = experiment_cells(cfg);
    if (cell_index >= cells.size()) throw ValidationError("cell index out of range");
    const ExperimentCell& cell = cells[cell_index];
    std::mt19937_64 rng(derive_seed(cfg.seed, cell.params, rep, 1));
    std::uniform_real_distribution<double> alpha_draw(0.6, 0.8);

    ScenarioSpec spec;
    switch (cfg.design) {
        case Design::NonGaussian: {
            spec = base_scenario(regular_hierarchy(9, 3), 0.8, 0.5, 0.4);
            const auto kind = static_cast<ErrorKind>(static_cast<int>(cell.value));
            for (std::size_t i = 0; i < 3; ++i) spec.errors[i] = ErrorSpec::of(kind);
            break;
        }
        case Design::Efficiency:
            if (cell.value > 0.0) {
                spec = base_scenario(regular_hierarchy(6, 3), 0.6, cell.value, 0.4);
            } else {
                spec = base_scenario(regular_hierarchy(static_cast<std::size_t>(-cell.value), 5), 0.8, 1.0, 0.4);
            }
            break;
        case Design::Proportion: {
            spec = base_scenario(regular_hierarchy(30, 6), 0.7, 0.5, 0.0);
            for (auto& a : spec.alpha) a = alpha_draw(rng);
            const auto irregular = static_cast<std::size_t>(std::lround(cell.value * 30.0));
            for (std::size_t i = 0; i < irregular; ++i) spec.errors[i] = ErrorSpec::of(random_irregular(rng));
            break;
        }
        case Design::Correlation:
            spec = base_scenario(regular_hierarchy(9, 3), 0.8, 0.5, cell.value);
            break;
        case Design::Complexity: {
            const auto nb = static_cast<std::size_t>(cell.value);
            spec = base_scenario(regular_hierarchy(nb, 10), 0.7, 0.5, 0.0);
            for (auto& a : spec.alpha) a = alpha_draw(rng);
            std::vector<std::size_t> order(nb);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            const auto irregular = static_cast<std::size_t>(std::lround(0.4 * static_cast<double>(nb)));
            for (std::size_t i = 0; i < irregular; ++i) spec.errors[order[i]] = ErrorSpec::of(random_irregular(rng));
            break;
        }
    }

    Replication out{build_hierarchy(spec.hierarchy), spec, {}, {}, {}, 1.0, {}, derive_seed(cfg.seed, cell.params, rep, 2)};
    out.panel = generate_panel(out.scenario, out.hierarchy, out.seed);
    out.base = fit_base_forecasts(out.panel.train(), out.panel.horizon, &out.clamped);
    out.actuals = out.panel.test();
    out.sigma_hat = pooled_sigma(*out.base.residuals);

    if (cfg.design == Design::NonGaussian) {
        const auto bottom = out.hierarchy.bottom_range();
        out.groups = {{"changeable", IndexRange{bottom.first, 3}.indices()},
                      {"stable", IndexRange{bottom.first + 3, bottom.count - 3}.indices()},
                      {"all", IndexRange{0, out.hierarchy.size()}.indices()}};
    } else {
        out.groups = level_groups(out.hierarchy);
    }
    return out;
}

LossSpec experiment_loss(LossKind kind, double sigma_hat) {
    switch (kind) {
        case LossKind::LS: return LossSpec::ls();
        case LossKind::LAD: return LossSpec::lad(sigma_hat);
        case LossKind::Huber: return LossSpec::huber_scaled(sigma_hat);
        default: throw ValidationError("experiments support ls, lad and huber losses");
    }
}

ReconcileResult run_method(const MethodSpec& method, const Replication& rep, const ReconcilerConfig& cfg) {
    if (method.kind == MethodSpec::Kind::BottomUp) return reconcile_bottom_up(rep.base, rep.hierarchy);
    const CovMatrix W = realize_design({method.cov, std::nullopt, 1.0}, &*rep.base.residuals, rep.hierarchy);
    if (method.kind == MethodSpec::Kind::Rome) {
        return reconcile_rome(rep.base, rep.hierarchy, W, experiment_loss(method.loss, rep.sigma_hat), cfg);
    }
    const auto ls = reconcile_rome(rep.base, rep.hierarchy, W, experiment_loss(LossKind::LS, rep.sigma_hat), cfg);
    const auto lad = reconcile_rome(rep.base, rep.hierarchy, W, experiment_loss(LossKind::LAD, rep.sigma_hat), cfg);
    return combine_forecasts(ls, lad, method.pattern);
}

namespace {

// Scores of one replication: [method][group][window] plus the base row.
struct RepScores {
    bool prepared = false;
    std::string prepare_error;
    std::uint64_t seed = 0;
    int clamped = 0;
    std::vector<std::vector<double>> base;                 // [group][window]
    std::vector<std::vector<std::vector<double>>> method;  // [method][group][window]
    std::vector<bool> ok;
    std::vector<std::string> error;
    std::vector<bool> converged;
    std::vector<double> ascent;
    std::vector<std::string> group_names;
};

RepScores score_replication(const ExperimentConfig& cfg, const std::vector<MethodSpec>& methods, std::size_t cell,
                            std::size_t rep) {
    RepScores s;
    s.seed = derive_seed(cfg.seed, experiment_cells(cfg).at(cell).params, rep, 2);
    Replication r;
    try {
        r = prepare_replication(cfg, cell, rep);
    } catch (const std::exception& e) {
        s.prepare_error = e.what();
        return s;
    }
    s.prepared = true;
    s.clamped = r.clamped;
    const auto windows = experiment_windows(r.panel.horizon);
    for (const auto& g : r.groups) s.group_names.push_back(g.name);
    auto score = [&](const Eigen::MatrixXd& f) {
        std::vector<std::vector<double>> out(r.groups.size());
        for (std::size_t gi = 0; gi < r.groups.size(); ++gi) {
            for (int w : windows) out[gi].push_back(rmse(f, r.actuals, {r.groups[gi].series, w}));
        }
        return out;
    };
    s.base = score(r.base.yhat);
    ReconcilerConfig rc = cfg.reconciler;
    rc.record_trace = true;
    for (const auto& m : methods) {
        try {
            const ReconcileResult res = run_method(m, r, rc);
            s.method.push_back(score(res.ytilde));
            s.ok.push_back(true);
            s.error.emplace_back();
            s.converged.push_back(res.all_converged());
            double ascent = 0.0;
            for (const auto& trace : res.objective_trace) {
                for (std::size_t i = 1; i < trace.size(); ++i) {
                    ascent = std::max(ascent, (trace[i] - trace[i - 1]) / std::max(1.0, std::abs(trace[i - 1])));
                }
            }
            s.ascent.push_back(ascent);
        } catch (const std::exception& e) {
            s.method.emplace_back();
            s.ok.push_back(false);
            s.error.emplace_back(e.what());
            s.converged.push_back(false);
            s.ascent.push_back(0.0);
        }
    }
    return s;
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg) {
    if (cfg.reps < 1) throw ValidationError("reps must be at least 1");
    validate(cfg.reconciler, build_hierarchy(figure1_hierarchy()));
    const auto cells = experiment_cells(cfg);
    const auto methods = cfg.methods.empty() ? parse_methods("", cfg.design) : cfg.methods;
    for (const auto& m : methods) {
        if (m.kind == MethodSpec::Kind::Rome && m.loss != LossKind::LS && m.loss != LossKind::LAD &&
            m.loss != LossKind::Huber) {
            throw ValidationError("experiments support ls, lad and huber losses");
        }
    }
    const auto reps = static_cast<std::size_t>(cfg.reps);
    const std::size_t jobs = cells.size() * reps;
    std::vector<RepScores> scores(jobs);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) scores[j] = score_replication(cfg, methods, j / reps, j % reps);
    };
    const unsigned threads = worker_count(cfg.threads, jobs);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    Report report;
    report.banner.push_back("design=" + to_string(cfg.design) + " reps=" + std::to_string(cfg.reps) +
                            " seed=" + std::to_string(cfg.seed) +
                            " aggregate=" + (cfg.mean_of_pct ? "mean-of-pct" : "pct-of-mean"));
    report.header = {"design", "params", "method", "loss", "cov", "group", "window", "mean_pct_change",
                     "alt_pct_change", "mean_rmse", "replications", "failures", "nonconverged",
                     "max_rel_objective_increase"};
    const auto windows = experiment_windows(ScenarioSpec{}.horizon);

    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<std::string> group_names;
        std::size_t prepare_failures = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            const auto& s = scores[c * reps + r];
            if (!s.prepared) {
                ++prepare_failures;
                std::cerr << "warning: replication " << r << " of " << cells[c].params << " (panel seed " << s.seed
                          << ") failed: " << s.prepare_error << "\n";
                continue;
            }
            if (group_names.empty()) group_names = s.group_names;
            if (s.clamped > 0) {
                std::cerr << "warning: " << s.clamped << " AR fit(s) clamped to |slope| " << kUnitRootClamp
                          << " on replication " << r << " of " << cells[c].params << " (panel seed " << s.seed << ")\n";
            }
        }
        // Base rows.
        for (std::size_t g = 0; g < group_names.size(); ++g) {
            for (std::size_t w = 0; w < windows.size(); ++w) {
                double sum = 0.0;
                std::size_t count = 0;
                for (std::size_t r = 0; r < reps; ++r) {
                    const auto& s = scores[c * reps + r];
                    if (!s.prepared) continue;
                    sum += s.base[g][w];
                    ++count;
                }
                report.add_row({to_string(cfg.design), cells[c].params, "base", "-", "-", group_names[g],
                                std::to_string(windows[w]), "0", "0", format_double(count ? sum / count : 0.0),
                                std::to_string(count), std::to_string(prepare_failures), "0", "0"});
            }
        }
        for (std::size_t m = 0; m < methods.size(); ++m) {
            std::size_t failures = prepare_failures;
            std::size_t nonconverged = 0;
            double ascent = 0.0;
            for (std::size_t r = 0; r < reps; ++r) {
                const auto& s = scores[c * reps + r];
                if (!s.prepared) continue;
                if (!s.ok[m]) {
                    ++failures;
                    std::cerr << "warning: " << methods[m].loss_label() << "-" << methods[m].cov_label() << " failed on replication "
                              << r << " of " << cells[c].params << " (panel seed " << s.seed << "): " << s.error[m] << "\n";
                    continue;
                }
                nonconverged += s.converged[m] ? 0 : 1;
                ascent = std::max(ascent, s.ascent[m]);
            }
            for (std::size_t g = 0; g < group_names.size(); ++g) {
                for (std::size_t w = 0; w < windows.size(); ++w) {
                    double pct_sum = 0.0, rmse_sum = 0.0, base_sum = 0.0;
                    std::size_t count = 0;
                    for (std::size_t r = 0; r < reps; ++r) {
                        const auto& s = scores[c * reps + r];
                        if (!s.prepared || !s.ok[m] || !(s.base[g][w] > 0.0)) continue;
                        pct_sum += pct_change(s.method[m][g][w], s.base[g][w]);
                        rmse_sum += s.method[m][g][w];
                        base_sum += s.base[g][w];
                        ++count;
                    }
                    const double mean_pct = count ? pct_sum / count : 0.0;
                    const double pct_of_mean = count ? pct_change(rmse_sum / count, base_sum / count) : 0.0;
                    const double primary = cfg.mean_of_pct ? mean_pct : pct_of_mean;
                    const double alt = cfg.mean_of_pct ? pct_of_mean : mean_pct;
                    report.add_row({to_string(cfg.design), cells[c].params, methods[m].method_label(),
                                    methods[m].loss_label(), methods[m].cov_label(), group_names[g],
                                    std::to_string(windows[w]), format_double(primary), format_double(alt),
                                    format_double(count ? rmse_sum / count : 0.0), std::to_string(count),
                                    std::to_string(failures), std::to_string(nonconverged), format_double(ascent)});
                }
            }
        }
    }
    return report;
}

Report run_bench(const std::string& scenario, int iters, std::uint64_t seed) {
    if (iters < 1) throw ValidationError("--iters must be at least 1");
    Replication rep;
    if (scenario == "fig1") {
        // Nine-series tree with one contaminated leaf.
        ScenarioSpec spec = base_scenario(figure1_hierarchy(), 0.8, 0.5, 0.4);
        spec.errors[0] = ErrorSpec::of(ErrorKind::MixtureNormal);
        rep.hierarchy = build_hierarchy(spec.hierarchy);
        rep.scenario = spec;
        rep.panel = generate_panel(spec, rep.hierarchy, seed);
        rep.base = fit_base_forecasts(rep.panel.train(), rep.panel.horizon);
        rep.actuals = rep.panel.test();
        rep.sigma_hat = pooled_sigma(*rep.base.residuals);
    } else {
        ExperimentConfig cfg;
        cfg.design = design_from_string(scenario);
        cfg.seed = seed;
        rep = prepare_replication(cfg, 0, 0);
    }

    Report report;
    report.banner.push_back("timings are hardware-dependent; compare rows within one run only");
    report.banner.push_back("scenario=" + scenario + " n=" + std::to_string(rep.hierarchy.size()) +
                            " horizons=" + std::to_string(rep.base.horizons()) + " iters=" + std::to_string(iters));
    report.header = {"method", "loss", "cov", "iters", "median_ms", "mean_ms", "mean_iterations"};
    const ReconcilerConfig rc;
    for (LossKind loss : kExperimentLosses) {
        for (CovKind cov : design_covs(Design::NonGaussian)) {
            const MethodSpec m{MethodSpec::Kind::Rome, loss, cov};
            std::vector<double> ms;
            double iterations = 0.0;
            for (int i = 0; i < iters; ++i) {
                const auto start = std::chrono::steady_clock::now();
                ReconcileResult res;
                if (loss == LossKind::LS) {
                    const CovMatrix W = realize_design({cov, std::nullopt, 1.0}, &*rep.base.residuals, rep.hierarchy);
                    res = reconcile_mint(rep.base, rep.hierarchy, W);
                } else {
                    res = run_method(m, rep, rc);
                }
                const auto stop = std::chrono::steady_clock::now();
                ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
                iterations = std::accumulate(res.iterations.begin(), res.iterations.end(), 0.0) /
                             static_cast<double>(res.iterations.size());
            }
            std::vector<double> sorted = ms;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t mid = sorted.size() / 2;
            const double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
            const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
            report.add_row({loss == LossKind::LS ? "mint" : "rome", to_string(loss), to_string(cov), std::to_string(iters),
                            format_double(median), format_double(mean), format_double(iterations)});
        }
    }
    return report;
}

}  // namespace rome
