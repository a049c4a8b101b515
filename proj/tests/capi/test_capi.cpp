#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "rome/rome.h"

namespace {

const char* kFig1 = R"({"levels": ["L2", "L1", "L0"],
  "children": {"L2-1": ["L1-1", "L1-2"], "L1-1": ["L0-1", "L0-2"], "L1-2": ["L0-3", "L0-4", "L0-5", "L0-6"]},
  "bottom_order": ["L0-1", "L0-2", "L0-3", "L0-4", "L0-5", "L0-6"]})";

struct Fig1 {
    rome_hierarchy* h = nullptr;
    std::vector<std::string> labels;
    std::vector<const char*> label_ptrs;

    Fig1() {
        REQUIRE(rome_hierarchy_from_json(kFig1, &h) == ROME_OK);
        for (size_t i = 0; i < rome_hierarchy_size(h); ++i) labels.emplace_back(rome_hierarchy_label(h, i));
        for (const auto& s : labels) label_ptrs.push_back(s.c_str());
    }
    ~Fig1() { rome_hierarchy_free(h); }

    rome_table* table(const std::vector<double>& values, size_t cols) const {
        std::vector<std::string> names;
        for (size_t j = 0; j < cols; ++j) names.push_back("c" + std::to_string(j + 1));
        std::vector<const char*> ptrs;
        for (const auto& s : names) ptrs.push_back(s.c_str());
        rome_table* t = nullptr;
        REQUIRE(rome_table_create(9, cols, label_ptrs.data(), ptrs.data(), values.data(), &t) == ROME_OK);
        return t;
    }
};

// Deterministic pseudo-noise without pulling in <random> state across tests.
double wiggle(size_t i) { return std::sin(1.7 * static_cast<double>(i) + 0.3) * 2.0; }

}  // namespace

TEST_CASE("hierarchy handles") {
    Fig1 f;
    CHECK(rome_hierarchy_size(f.h) == 9);
    CHECK(rome_hierarchy_bottom_count(f.h) == 6);
    CHECK(std::string(rome_hierarchy_label(f.h, 0)) == "L2-1");
    CHECK(rome_hierarchy_label(f.h, 9) == nullptr);

    std::vector<double> s(54), u(27);
    REQUIRE(rome_hierarchy_summing(f.h, s.data()) == ROME_OK);
    REQUIRE(rome_hierarchy_constraint(f.h, u.data()) == ROME_OK);
    // Row-major S: first row sums everything, row 2 covers the first two leaves.
    for (size_t j = 0; j < 6; ++j) CHECK(s[j] == 1.0);
    CHECK(s[6] == 1.0);
    CHECK(s[8] == 0.0);
    for (size_t r = 0; r < 3; ++r) {
        for (size_t c = 0; c < 6; ++c) {
            double acc = 0.0;
            for (size_t k = 0; k < 9; ++k) acc += u[r * 9 + k] * s[k * 6 + c];
            CHECK(acc == 0.0);
        }
    }

    size_t first = 0, count = 0;
    REQUIRE(rome_hierarchy_level_range(f.h, "L1", &first, &count) == ROME_OK);
    CHECK(first == 1);
    CHECK(count == 2);
    CHECK(rome_hierarchy_level_range(f.h, "L9", &first, &count) == ROME_ERR_VALIDATION);
    CHECK(std::string(rome_last_error()).find("L9") != std::string::npos);

    char* json = nullptr;
    REQUIRE(rome_hierarchy_to_json(f.h, &json) == ROME_OK);
    rome_hierarchy* again = nullptr;
    CHECK(rome_hierarchy_from_json(json, &again) == ROME_OK);
    CHECK(rome_hierarchy_size(again) == 9);
    rome_hierarchy_free(again);
    rome_string_free(json);

    rome_hierarchy* reg = nullptr;
    REQUIRE(rome_hierarchy_regular(30, 6, &reg) == ROME_OK);
    CHECK(rome_hierarchy_size(reg) == 36);
    rome_hierarchy_free(reg);

    rome_hierarchy* bad = nullptr;
    CHECK(rome_hierarchy_from_json("{\"levels\": [", &bad) == ROME_ERR_VALIDATION);
    CHECK(bad == nullptr);
    CHECK(rome_hierarchy_load("/nonexistent/h.json", &bad) == ROME_ERR_IO);
    CHECK(rome_hierarchy_from_json(nullptr, &bad) != ROME_OK);
    CHECK(std::string(rome_version()).size() > 0);
}

TEST_CASE("tables") {
    rome_table* t = nullptr;
    REQUIRE(rome_table_parse_csv("series,h1,h2\na,1,2\nb,3,4.5\n", &t) == ROME_OK);
    CHECK(rome_table_rows(t) == 2);
    CHECK(rome_table_cols(t) == 2);
    CHECK(std::string(rome_table_row_label(t, 1)) == "b");
    CHECK(std::string(rome_table_col_label(t, 0)) == "h1");
    CHECK(rome_table_get(t, 1, 1) == 4.5);
    std::vector<double> data(4);
    REQUIRE(rome_table_data(t, data.data()) == ROME_OK);
    CHECK(data == std::vector<double>{1, 2, 3, 4.5});
    char* text = nullptr;
    REQUIRE(rome_table_to_csv(t, &text) == ROME_OK);
    CHECK(std::string(text) == "series,h1,h2\na,1,2\nb,3,4.5\n");
    rome_string_free(text);
    CHECK(rome_table_write_csv(t, "/nonexistent/dir/t.csv") == ROME_ERR_IO);
    rome_table_free(t);

    rome_table* bad = nullptr;
    CHECK(rome_table_parse_csv("series,h1\na,oops\n", &bad) == ROME_ERR_VALIDATION);
    CHECK(rome_table_read_csv("/nonexistent/t.csv", &bad) == ROME_ERR_IO);
}

TEST_CASE("reconcile through the C surface") {
    Fig1 f;
    std::vector<double> yhat(9 * 2);
    for (size_t i = 0; i < yhat.size(); ++i) yhat[i] = 10.0 + wiggle(i);
    rome_table* base = f.table(yhat, 2);
    std::vector<double> res(9 * 40);
    for (size_t i = 0; i < res.size(); ++i) res[i] = wiggle(i * 7 + 1);
    rome_table* resid = f.table(res, 40);

    rome_options opts;
    rome_options_init(&opts);
    CHECK(opts.method == ROME_METHOD_ROME);
    CHECK(opts.epsilon == 1e-4);
    CHECK(opts.omega_max == 1000);

    opts.method = ROME_METHOD_MINT;
    opts.cov = ROME_COV_SHRINK;
    rome_result* mint = nullptr;
    REQUIRE(rome_reconcile(f.h, base, resid, &opts, &mint) == ROME_OK);
    CHECK(rome_result_horizons(mint) == 2);
    CHECK(rome_result_iterations(mint, 0) == 1);
    CHECK(rome_result_coherence(mint) < 1e-9);

    opts.method = ROME_METHOD_ROME;
    opts.loss = ROME_LOSS_LS;
    rome_result* ls = nullptr;
    REQUIRE(rome_reconcile(f.h, base, resid, &opts, &ls) == ROME_OK);
    for (size_t i = 0; i < 9; ++i) {
        for (size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(rome_table_get(rome_result_forecasts(ls), i, j) -
                           rome_table_get(rome_result_forecasts(mint), i, j)) < 1e-6);
        }
    }

    for (rome_loss loss : {ROME_LOSS_LAD, ROME_LOSS_HUBER, ROME_LOSS_LP, ROME_LOSS_QUANTILE}) {
        opts.loss = loss;
        opts.lp_p = 1.5;
        opts.quantile_q = 0.6;
        rome_result* r = nullptr;
        REQUIRE(rome_reconcile(f.h, base, resid, &opts, &r) == ROME_OK);
        CHECK(rome_result_coherence(r) < 1e-6);
        CHECK(rome_result_converged(r, 1) == 1);
        CHECK(std::isfinite(rome_result_objective(r, 0)));
        rome_result_free(r);
    }

    opts.method = ROME_METHOD_COMBINE;
    opts.pattern = ROME_PATTERN_TWO_WAY;
    rome_result* comb = nullptr;
    REQUIRE(rome_reconcile(f.h, base, resid, &opts, &comb) == ROME_OK);
    CHECK(rome_result_coherence(comb) < 1e-6);
    rome_result_free(comb);

    opts.method = ROME_METHOD_BU;
    rome_result* bu = nullptr;
    REQUIRE(rome_reconcile(f.h, base, nullptr, &opts, &bu) == ROME_OK);
    CHECK(rome_table_get(rome_result_forecasts(bu), 8, 1) == yhat[17]);
    rome_result_free(bu);

    // Custom W equal to the identity reproduces OLS.
    std::vector<double> eye(81, 0.0);
    for (size_t i = 0; i < 9; ++i) eye[i * 10] = 1.0;
    rome_options a;
    rome_options_init(&a);
    a.method = ROME_METHOD_MINT;
    rome_options b = a;
    b.cov = ROME_COV_CUSTOM;
    b.custom_w = eye.data();
    rome_result *ra = nullptr, *rb = nullptr;
    REQUIRE(rome_reconcile(f.h, base, nullptr, &a, &ra) == ROME_OK);
    REQUIRE(rome_reconcile(f.h, base, nullptr, &b, &rb) == ROME_OK);
    CHECK(std::abs(rome_table_get(rome_result_forecasts(ra), 0, 0) - rome_table_get(rome_result_forecasts(rb), 0, 0)) <
          1e-10);
    rome_result_free(ra);
    rome_result_free(rb);

    rome_result* none = nullptr;
    rome_options w = a;
    w.cov = ROME_COV_WLSV;
    CHECK(rome_reconcile(f.h, base, nullptr, &w, &none) == ROME_ERR_VALIDATION);
    CHECK(std::string(rome_last_error()).find("residual") != std::string::npos);
    CHECK(none == nullptr);
    w = a;
    w.epsilon = -1.0;
    w.method = ROME_METHOD_ROME;
    CHECK(rome_reconcile(f.h, base, nullptr, &w, &none) == ROME_ERR_VALIDATION);

    // Singular sample covariance: fewer residual samples than series.
    rome_table* thin = f.table(std::vector<double>(res.begin(), res.begin() + 27), 3);
    w = a;
    w.cov = ROME_COV_SAMPLE;
    CHECK(rome_reconcile(f.h, base, thin, &w, &none) == ROME_ERR_NUMERIC);
    rome_table_free(thin);

    rome_table* wrong = nullptr;
    REQUIRE(rome_table_parse_csv("series,h1\nx,1\n", &wrong) == ROME_OK);
    CHECK(rome_reconcile(f.h, wrong, nullptr, &a, &none) == ROME_ERR_VALIDATION);
    rome_table_free(wrong);

    rome_result_free(mint);
    rome_result_free(ls);
    rome_table_free(base);
    rome_table_free(resid);
}

TEST_CASE("accuracy and reports") {
    const double f[] = {1, 2, 3, 4};
    const double a[] = {1, 2, 3, 4};
    const size_t group[] = {0, 1};
    double out = -1.0;
    REQUIRE(rome_rmse(f, a, 2, 2, group, 2, 2, &out) == ROME_OK);
    CHECK(out == 0.0);
    const double g[] = {4, 2, 6, 4};
    REQUIRE(rome_rmse(g, a, 2, 2, group, 2, 1, &out) == ROME_OK);
    CHECK(out == doctest::Approx(3.0));
    CHECK(rome_rmse(g, a, 2, 2, group, 2, 3, &out) == ROME_ERR_VALIDATION);
    REQUIRE(rome_pct_change(0.9, 1.0, &out) == ROME_OK);
    CHECK(out == doctest::Approx(-10.0));

    Fig1 fig;
    std::vector<double> act(9 * 3), fc(9 * 3);
    for (size_t i = 0; i < act.size(); ++i) {
        act[i] = wiggle(i);
        fc[i] = act[i] + 0.5;
    }
    rome_table* ta = fig.table(act, 3);
    rome_table* tf = fig.table(fc, 3);
    const int windows[] = {1, 3};
    rome_report* rep = nullptr;
    REQUIRE(rome_evaluate(fig.h, tf, ta, tf, windows, 2, &rep) == ROME_OK);
    CHECK(rome_report_rows(rep) == 8);
    char* csv = nullptr;
    REQUIRE(rome_report_to_string(rep, ROME_FORMAT_CSV, &csv) == ROME_OK);
    CHECK(std::string(csv).find("whole,3,0.5,0.5,0") != std::string::npos);
    rome_string_free(csv);
    rome_report_free(rep);
    rome_table_free(ta);
    rome_table_free(tf);

    rome_experiment_options eo;
    rome_experiment_options_init(&eo);
    eo.design = "nongaussian";
    eo.dist = "mixture";
    eo.reps = 2;
    eo.methods = "ls-ols,bu";
    eo.threads = 1;
    rome_report* sim = nullptr;
    REQUIRE(rome_simulate(&eo, &sim) == ROME_OK);
    CHECK(rome_report_rows(sim) == 27);
    char* json = nullptr;
    REQUIRE(rome_report_to_string(sim, ROME_FORMAT_JSON, &json) == ROME_OK);
    CHECK(std::string(json).find("\"rows\"") != std::string::npos);
    rome_string_free(json);
    rome_report_free(sim);

    eo.design = "unknown";
    CHECK(rome_simulate(&eo, &sim) == ROME_ERR_VALIDATION);
    CHECK(rome_bench("fig1", 0, 1, &sim) == ROME_ERR_VALIDATION);
}
