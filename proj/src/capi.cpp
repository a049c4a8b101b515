#include "rome/rome.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "rome/errors.hpp"
#include "rome/evaluate.hpp"
#include "rome/hierarchy.hpp"
#include "rome/reconciler.hpp"
#include "rome/report.hpp"
#include "rome/simulate.hpp"
#include "rome/table_io.hpp"

struct rome_hierarchy {
    rome::Hierarchy h;
};

struct rome_table {
    rome::LabeledTable t;
};

struct rome_result {
    rome_table forecasts;
    rome::ReconcileResult r;
    double coherence = 0.0;
};

struct rome_report {
    rome::Report r;
};

namespace {

thread_local std::string g_last_error;

template <class F>
rome_status guard(F&& f) {
    try {
        f();
        g_last_error.clear();
        return ROME_OK;
    } catch (const rome::ValidationError& e) {
        g_last_error = e.what();
        return ROME_ERR_VALIDATION;
    } catch (const rome::NumericError& e) {
        g_last_error = e.what();
        return ROME_ERR_NUMERIC;
    } catch (const rome::IoError& e) {
        g_last_error = e.what();
        return ROME_ERR_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return ROME_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ROME_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return ROME_ERR_INTERNAL;
    }
}

void require(bool cond, const char* msg) {
    if (!cond) throw rome::ValidationError(msg);
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void copy_row_major(const Eigen::MatrixXd& m, double* out) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
    }
}

rome::LossSpec make_loss(const rome_options& o, double sigma_hat, bool have_sigma) {
    switch (o.loss) {
        case ROME_LOSS_LS: return rome::LossSpec::ls();
        case ROME_LOSS_LAD: return rome::LossSpec::lad(sigma_hat);
        case ROME_LOSS_HUBER:
            if (o.huber_k > 0.0) return rome::LossSpec::huber(o.huber_k);
            if (!have_sigma) throw rome::ValidationError("huber loss without --huber-k requires residuals to scale k");
            return rome::LossSpec::huber_scaled(sigma_hat);
        case ROME_LOSS_LP: return rome::LossSpec::lp(o.lp_p);
        case ROME_LOSS_QUANTILE: return rome::LossSpec::quantile(o.quantile_q);
    }
    throw rome::ValidationError("unknown loss");
}

rome::CovKind to_cov(rome_cov c) {
    switch (c) {
        case ROME_COV_OLS: return rome::CovKind::OLS;
        case ROME_COV_WLSV: return rome::CovKind::WLSv;
        case ROME_COV_WLSS: return rome::CovKind::WLSs;
        case ROME_COV_SAMPLE: return rome::CovKind::Sample;
        case ROME_COV_SHRINK: return rome::CovKind::Shrink;
        default: break;
    }
    throw rome::ValidationError("unknown covariance design");
}

rome::CombinePattern to_pattern(rome_pattern p) {
    switch (p) {
        case ROME_PATTERN_AVERAGE: return rome::CombinePattern::Average;
        case ROME_PATTERN_ONE_WAY: return rome::CombinePattern::OneWay;
        case ROME_PATTERN_TWO_WAY: return rome::CombinePattern::TwoWay;
    }
    throw rome::ValidationError("unknown combination pattern");
}

}  // namespace

extern "C" {

const char* rome_version(void) { return ROME_VERSION_STRING; }

const char* rome_last_error(void) { return g_last_error.c_str(); }

void rome_string_free(char* s) { delete[] s; }

// ---------------------------------------------------------------------------

rome_status rome_hierarchy_from_json(const char* json, rome_hierarchy** out) {
    return guard([&] {
        require(json != nullptr && out != nullptr, "null argument");
        *out = new rome_hierarchy{rome::build_hierarchy(rome::hierarchy_spec_from_json(json))};
    });
}

rome_status rome_hierarchy_load(const char* path, rome_hierarchy** out) {
    return guard([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = new rome_hierarchy{rome::build_hierarchy(rome::load_hierarchy_spec(path))};
    });
}

rome_status rome_hierarchy_regular(size_t bottom, size_t fan_out, rome_hierarchy** out) {
    return guard([&] {
        require(out != nullptr, "null argument");
        *out = new rome_hierarchy{rome::build_hierarchy(rome::regular_hierarchy(bottom, fan_out))};
    });
}

rome_status rome_hierarchy_to_json(const rome_hierarchy* h, char** out) {
    return guard([&] {
        require(h != nullptr && out != nullptr, "null argument");
        *out = dup_string(rome::hierarchy_spec_to_json(h->h.spec()));
    });
}

void rome_hierarchy_free(rome_hierarchy* h) { delete h; }

size_t rome_hierarchy_size(const rome_hierarchy* h) { return h ? h->h.size() : 0; }

size_t rome_hierarchy_bottom_count(const rome_hierarchy* h) { return h ? h->h.bottom_count() : 0; }

const char* rome_hierarchy_label(const rome_hierarchy* h, size_t i) {
    if (h == nullptr || i >= h->h.size()) return nullptr;
    return h->h.labels()[i].c_str();
}

rome_status rome_hierarchy_level_range(const rome_hierarchy* h, const char* level, size_t* first, size_t* count) {
    return guard([&] {
        require(h != nullptr && level != nullptr && first != nullptr && count != nullptr, "null argument");
        const auto r = rome::level_indices(h->h, level);
        *first = r.first;
        *count = r.count;
    });
}

rome_status rome_hierarchy_summing(const rome_hierarchy* h, double* out) {
    return guard([&] {
        require(h != nullptr && out != nullptr, "null argument");
        copy_row_major(h->h.summing(), out);
    });
}

rome_status rome_hierarchy_constraint(const rome_hierarchy* h, double* out) {
    return guard([&] {
        require(h != nullptr && out != nullptr, "null argument");
        copy_row_major(h->h.constraint(), out);
    });
}

// ---------------------------------------------------------------------------

rome_status rome_table_create(size_t rows, size_t cols, const char* const* row_labels, const char* const* col_labels,
                              const double* values, rome_table** out) {
    return guard([&] {
        require(out != nullptr && row_labels != nullptr && (values != nullptr || rows * cols == 0), "null argument");
        auto t = std::make_unique<rome_table>();
        for (size_t i = 0; i < rows; ++i) {
            require(row_labels[i] != nullptr, "null row label");
            t->t.row_labels.emplace_back(row_labels[i]);
        }
        if (col_labels != nullptr) {
            for (size_t j = 0; j < cols; ++j) {
                require(col_labels[j] != nullptr, "null column label");
                t->t.column_labels.emplace_back(col_labels[j]);
            }
        } else {
            t->t.column_labels = rome::numbered_labels("h", cols);
        }
        t->t.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (size_t i = 0; i < rows; ++i) {
            for (size_t j = 0; j < cols; ++j) {
                t->t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
            }
        }
        *out = t.release();
    });
}

rome_status rome_table_read_csv(const char* path, rome_table** out) {
    return guard([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = new rome_table{rome::read_table_csv(path)};
    });
}

rome_status rome_table_parse_csv(const char* text, rome_table** out) {
    return guard([&] {
        require(text != nullptr && out != nullptr, "null argument");
        *out = new rome_table{rome::parse_table_csv(text)};
    });
}

rome_status rome_table_write_csv(const rome_table* t, const char* path) {
    return guard([&] {
        require(t != nullptr && path != nullptr, "null argument");
        rome::write_table_csv(t->t, path);
    });
}

rome_status rome_table_to_csv(const rome_table* t, char** out) {
    return guard([&] {
        require(t != nullptr && out != nullptr, "null argument");
        *out = dup_string(rome::table_to_csv(t->t));
    });
}

size_t rome_table_rows(const rome_table* t) { return t ? static_cast<size_t>(t->t.values.rows()) : 0; }

size_t rome_table_cols(const rome_table* t) { return t ? static_cast<size_t>(t->t.values.cols()) : 0; }

const char* rome_table_row_label(const rome_table* t, size_t i) {
    if (t == nullptr || i >= t->t.row_labels.size()) return nullptr;
    return t->t.row_labels[i].c_str();
}

const char* rome_table_col_label(const rome_table* t, size_t j) {
    if (t == nullptr || j >= t->t.column_labels.size()) return nullptr;
    return t->t.column_labels[j].c_str();
}

double rome_table_get(const rome_table* t, size_t i, size_t j) {
    if (t == nullptr || i >= rome_table_rows(t) || j >= rome_table_cols(t)) return std::nan("");
    return t->t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

rome_status rome_table_data(const rome_table* t, double* out) {
    return guard([&] {
        require(t != nullptr && out != nullptr, "null argument");
        copy_row_major(t->t.values, out);
    });
}

void rome_table_free(rome_table* t) { delete t; }

// ---------------------------------------------------------------------------

void rome_options_init(rome_options* o) {
    if (o == nullptr) return;
    const rome::ReconcilerConfig d;
    o->method = ROME_METHOD_ROME;
    o->loss = ROME_LOSS_LS;
    o->cov = ROME_COV_OLS;
    o->pattern = ROME_PATTERN_AVERAGE;
    o->huber_k = 0.0;
    o->lp_p = 1.5;
    o->quantile_q = 0.5;
    o->shrink_lambda = -1.0;
    o->kh = 1.0;
    o->custom_w = nullptr;
    o->varsigma = d.varsigma;
    o->epsilon = d.epsilon;
    o->omega_max = d.omega_max;
    o->init = ROME_INIT_ZERO;
    o->lad_mode = ROME_LAD_HUBER_APPROX;
    o->perturbation = d.perturbation;
}

rome_status rome_reconcile(const rome_hierarchy* h, const rome_table* base, const rome_table* residuals,
                           const rome_options* opts, rome_result** out) {
    return guard([&] {
        require(h != nullptr && base != nullptr && opts != nullptr && out != nullptr, "null argument");
        const auto& H = h->h;
        const rome_options& o = *opts;
        rome::check_labels(base->t, H, "forecasts");
        rome::BaseForecastSet set{base->t.values, std::nullopt};
        if (residuals != nullptr) {
            rome::check_labels(residuals->t, H, "residuals");
            set.residuals = rome::ResidualPanel{residuals->t.values};
            rome::validate(*set.residuals, static_cast<Eigen::Index>(H.size()));
        }

        rome::ReconcilerConfig cfg;
        cfg.varsigma = o.varsigma;
        cfg.epsilon = o.epsilon;
        cfg.omega_max = o.omega_max;
        cfg.init = o.init == ROME_INIT_BASE_PROJECTION ? rome::InitKind::BaseProjection : rome::InitKind::Zero;
        cfg.lad_mode = o.lad_mode == ROME_LAD_PERTURBATION ? rome::LadMode::Perturbation : rome::LadMode::HuberApprox;
        cfg.perturbation = o.perturbation;
        rome::validate(cfg, H);

        auto res = std::make_unique<rome_result>();
        if (o.method == ROME_METHOD_BU) {
            res->r = rome::reconcile_bottom_up(set, H);
        } else {
            rome::CovMatrix W;
            if (o.cov == ROME_COV_CUSTOM) {
                require(o.custom_w != nullptr, "custom covariance design requires a matrix");
                const auto n = static_cast<Eigen::Index>(H.size());
                Eigen::MatrixXd m(n, n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = o.custom_w[i * n + j];
                }
                W = rome::make_cov_matrix(m, "custom");
            } else {
                rome::CovarianceDesign design{to_cov(o.cov), std::nullopt, o.kh};
                if (o.shrink_lambda >= 0.0) design.lambda = o.shrink_lambda;
                W = rome::realize_design(design, set.residuals ? &*set.residuals : nullptr, H);
            }
            const bool have_sigma = set.residuals.has_value();
            const double sigma_hat = have_sigma ? rome::pooled_sigma(*set.residuals) : 1.0;
            switch (o.method) {
                case ROME_METHOD_MINT: res->r = rome::reconcile_mint(set, H, W); break;
                case ROME_METHOD_ROME: res->r = rome::reconcile_rome(set, H, W, make_loss(o, sigma_hat, have_sigma), cfg); break;
                case ROME_METHOD_COMBINE: {
                    const auto ls = rome::reconcile_rome(set, H, W, rome::LossSpec::ls(), cfg);
                    const auto lad = rome::reconcile_rome(set, H, W, rome::LossSpec::lad(sigma_hat), cfg);
                    res->r = rome::combine_forecasts(ls, lad, to_pattern(o.pattern));
                    break;
                }
                default: throw rome::ValidationError("unknown method");
            }
        }
        res->forecasts.t = rome::LabeledTable{H.labels(), base->t.column_labels, res->r.ytilde};
        res->coherence = rome::coherence_residual(H, res->r.ytilde);
        *out = res.release();
    });
}

const rome_table* rome_result_forecasts(const rome_result* r) { return r ? &r->forecasts : nullptr; }

size_t rome_result_horizons(const rome_result* r) { return r ? r->r.iterations.size() : 0; }

int rome_result_iterations(const rome_result* r, size_t h) {
    return (r && h < r->r.iterations.size()) ? r->r.iterations[h] : -1;
}

int rome_result_converged(const rome_result* r, size_t h) {
    return (r && h < r->r.converged.size()) ? static_cast<int>(r->r.converged[h]) : 0;
}

double rome_result_objective(const rome_result* r, size_t h) {
    return (r && h < r->r.objective.size()) ? r->r.objective[h] : std::nan("");
}

double rome_result_coherence(const rome_result* r) { return r ? r->coherence : std::nan(""); }

void rome_result_free(rome_result* r) { delete r; }

// ---------------------------------------------------------------------------

rome_status rome_rmse(const double* forecasts, const double* actuals, size_t n, size_t horizons, const size_t* group,
                      size_t group_size, size_t window, double* out) {
    return guard([&] {
        require(forecasts != nullptr && actuals != nullptr && out != nullptr, "null argument");
        require(group != nullptr || group_size == 0, "null group");
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        const auto rows = static_cast<Eigen::Index>(n);
        const auto cols = static_cast<Eigen::Index>(horizons);
        const Eigen::MatrixXd f = Eigen::Map<const RowMajor>(forecasts, rows, cols);
        const Eigen::MatrixXd a = Eigen::Map<const RowMajor>(actuals, rows, cols);
        *out = rome::rmse(f, a, {std::vector<std::size_t>(group, group + group_size), static_cast<int>(window)});
    });
}

rome_status rome_pct_change(double rmse_method, double rmse_base, double* out) {
    return guard([&] {
        require(out != nullptr, "null argument");
        *out = rome::pct_change(rmse_method, rmse_base);
    });
}

// ---------------------------------------------------------------------------

void rome_experiment_options_init(rome_experiment_options* o) {
    if (o == nullptr) return;
    const rome::ExperimentConfig d;
    o->design = "nongaussian";
    o->dist = nullptr;
    o->sigma = 0.0;
    o->bottom = 0;
    o->proportion = 0.0;
    o->rho = -1.0;
    o->reps = d.reps;
    o->seed = d.seed;
    o->methods = nullptr;
    o->threads = 1;
    o->mean_of_pct = 1;
    o->lad_mode = ROME_LAD_HUBER_APPROX;
}

rome_status rome_simulate(const rome_experiment_options* o, rome_report** out) {
    return guard([&] {
        require(o != nullptr && out != nullptr && o->design != nullptr, "null argument");
        rome::ExperimentConfig cfg;
        cfg.design = rome::design_from_string(o->design);
        if (o->dist != nullptr && *o->dist != '\0') cfg.overrides.dist = std::string(o->dist);
        if (o->sigma > 0.0) cfg.overrides.sigma = o->sigma;
        if (o->bottom > 0) cfg.overrides.bottom = o->bottom;
        if (o->proportion > 0.0) cfg.overrides.proportion = o->proportion;
        if (o->rho >= 0.0) cfg.overrides.rho = o->rho;
        cfg.reps = o->reps;
        cfg.seed = o->seed;
        cfg.methods = rome::parse_methods(o->methods ? o->methods : "", cfg.design);
        cfg.threads = o->threads;
        cfg.mean_of_pct = o->mean_of_pct != 0;
        cfg.reconciler.lad_mode =
            o->lad_mode == ROME_LAD_PERTURBATION ? rome::LadMode::Perturbation : rome::LadMode::HuberApprox;
        *out = new rome_report{rome::run_experiment(cfg)};
    });
}

rome_status rome_bench(const char* scenario, int iters, uint64_t seed, rome_report** out) {
    return guard([&] {
        require(scenario != nullptr && out != nullptr, "null argument");
        *out = new rome_report{rome::run_bench(scenario, iters, seed)};
    });
}

rome_status rome_evaluate(const rome_hierarchy* h, const rome_table* forecasts, const rome_table* actuals,
                          const rome_table* base, const int* windows, size_t window_count, rome_report** out) {
    return guard([&] {
        require(h != nullptr && forecasts != nullptr && actuals != nullptr && out != nullptr, "null argument");
        require(windows != nullptr && window_count > 0, "at least one window is required");
        const auto& H = h->h;
        rome::check_labels(forecasts->t, H, "forecasts");
        rome::check_labels(actuals->t, H, "actuals");
        if (base != nullptr) rome::check_labels(base->t, H, "base forecasts");
        const auto cols = forecasts->t.values.cols();
        for (size_t w = 0; w < window_count; ++w) {
            if (windows[w] < 1 || windows[w] > cols) {
                throw rome::ValidationError("window " + std::to_string(windows[w]) + " outside 1.." + std::to_string(cols));
            }
        }

        std::vector<rome::EvalGroup> groups;
        for (const auto& level : H.level_names()) groups.push_back({level, rome::level_indices(H, level).indices()});
        groups.push_back({"whole", rome::IndexRange{0, H.size()}.indices()});

        rome::Report report;
        report.header = {"group", "window", "rmse"};
        if (base != nullptr) {
            report.header.push_back("base_rmse");
            report.header.push_back("pct_change");
        }
        for (const auto& g : groups) {
            for (size_t w = 0; w < window_count; ++w) {
                const rome::EvalWindow win{g.series, windows[w]};
                const double r = rome::rmse(forecasts->t.values, actuals->t.values, win);
                std::vector<std::string> row = {g.name, std::to_string(windows[w]), rome::format_double(r)};
                if (base != nullptr) {
                    const double b = rome::rmse(base->t.values, actuals->t.values, win);
                    row.push_back(rome::format_double(b));
                    row.push_back(b > 0.0 ? rome::format_double(rome::pct_change(r, b)) : "nan");
                }
                report.add_row(std::move(row));
            }
        }
        *out = new rome_report{std::move(report)};
    });
}

size_t rome_report_rows(const rome_report* r) { return r ? r->r.rows.size() : 0; }

rome_status rome_report_to_string(const rome_report* r, rome_format format, char** out) {
    return guard([&] {
        require(r != nullptr && out != nullptr, "null argument");
        *out = dup_string(r->r.render(format == ROME_FORMAT_JSON ? rome::ReportFormat::Json : rome::ReportFormat::Csv));
    });
}

rome_status rome_report_write(const rome_report* r, rome_format format, const char* path) {
    return guard([&] {
        require(r != nullptr && path != nullptr, "null argument");
        rome::write_text_file(path,
                              r->r.render(format == ROME_FORMAT_JSON ? rome::ReportFormat::Json : rome::ReportFormat::Csv));
    });
}

void rome_report_free(rome_report* r) { delete r; }

}  // extern "C"
