#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "rome/errors.hpp"
#include "rome/hierarchy.hpp"

using namespace rome;

namespace {

HierarchySpec fig1() {
    HierarchySpec spec;
    spec.levels = {"L2", "L1", "L0"};
    spec.children = {{"T", {"A", "B"}}, {"A", {"a1", "a2"}}, {"B", {"b1", "b2", "b3", "b4"}}};
    spec.bottom_order = {"a1", "a2", "b1", "b2", "b3", "b4"};
    return spec;
}

HierarchySpec two_node() {
    HierarchySpec spec;
    spec.levels = {"top", "leaf"};
    spec.children = {{"T", {"x"}}};
    spec.bottom_order = {"x"};
    return spec;
}

}  // namespace

TEST_CASE("figure-1 tree has the expected summing matrix") {
    const Hierarchy h = build_hierarchy(fig1());
    CHECK(h.size() == 9);
    CHECK(h.bottom_count() == 6);
    Eigen::MatrixXd expected(9, 6);
    expected << 1, 1, 1, 1, 1, 1,
                1, 1, 0, 0, 0, 0,
                0, 0, 1, 1, 1, 1,
                Eigen::MatrixXd::Identity(6, 6);
    CHECK(h.summing() == expected);
    CHECK(h.labels() == std::vector<std::string>{"T", "A", "B", "a1", "a2", "b1", "b2", "b3", "b4"});
}

TEST_CASE("smallest hierarchy") {
    const Hierarchy h = build_hierarchy(two_node());
    CHECK(h.size() == 2);
    CHECK(h.bottom_count() == 1);
    CHECK(h.summing() == Eigen::MatrixXd::Ones(2, 1));
    Eigen::MatrixXd u(1, 2);
    u << 1, -1;
    CHECK(h.constraint() == u);
    CHECK(constraint_matrix(h) == u);
}

TEST_CASE("regular 30/6 tree has 36 series") {
    const Hierarchy h = build_hierarchy(regular_hierarchy(30, 6));
    CHECK(h.size() == 36);
    CHECK(h.bottom_count() == 30);
    const auto mid = level_indices(h, "L1");
    CHECK(mid.first == 1);
    CHECK(mid.last() == 5);
    CHECK_THROWS_AS(regular_hierarchy(31, 6), ValidationError);
    const Hierarchy flat = build_hierarchy(regular_hierarchy(4, 4));
    CHECK(flat.size() == 5);
}

TEST_CASE("constraint and selector blocks") {
    const Hierarchy h = build_hierarchy(fig1());
    const Eigen::MatrixXd& U = h.constraint();
    CHECK(U.rows() == 3);
    CHECK(U.cols() == 9);
    CHECK(U.leftCols(3) == Eigen::MatrixXd::Identity(3, 3));
    CHECK((U * h.summing()).isZero(0.0));
    CHECK(h.selector() * h.summing() == Eigen::MatrixXd::Identity(6, 6));
}

TEST_CASE("level ranges") {
    const Hierarchy h = build_hierarchy(fig1());
    const auto bottom = level_indices(h, "L0");
    CHECK(bottom.first == 3);
    CHECK(bottom.last() == 8);
    const auto top = level_indices(h, "L2");
    CHECK(top.first == 0);
    CHECK(top.count == 1);
    CHECK(h.level_of(1) == "L1");
    CHECK_THROWS_AS(level_indices(h, "nope"), ValidationError);
}

TEST_CASE("random trees: U S = 0, J S = I, rows of S match descendant walks") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int depth = 1 + trial % 3;
        const HierarchySpec spec = oracle::random_tree(rng, depth, 4);
        const Hierarchy h = build_hierarchy(spec);
        CHECK((h.constraint() * h.summing()).isZero(0.0));
        CHECK(h.selector() * h.summing() == Eigen::MatrixXd::Identity(h.bottom_count(), h.bottom_count()));
        for (std::size_t i = 0; i < h.size(); ++i) {
            const auto leaves = oracle::descendants(spec, h.labels()[i]);
            for (std::size_t j = 0; j < h.bottom_count(); ++j) {
                const double want = leaves.count(spec.bottom_order[j]) ? 1.0 : 0.0;
                REQUIRE(h.summing()(i, j) == want);
            }
        }
        // Stable ordering across rebuilds.
        const Hierarchy again = build_hierarchy(spec);
        CHECK(again.summing() == h.summing());
        CHECK(again.labels() == h.labels());
    }
}

TEST_CASE("structural errors") {
    SUBCASE("duplicate node") {
        auto spec = fig1();
        spec.children[2].second[0] = "a1";
        CHECK_THROWS_AS(build_hierarchy(spec), ValidationError);
    }
    SUBCASE("two roots") {
        auto spec = fig1();
        spec.children.push_back({"Z", {"z1"}});
        CHECK_THROWS_AS(build_hierarchy(spec), ValidationError);
    }
    SUBCASE("cycle") {
        auto spec = fig1();
        spec.children.push_back({"a1", {"T"}});
        CHECK_THROWS_AS(build_hierarchy(spec), ValidationError);
    }
    SUBCASE("empty child list") {
        auto spec = fig1();
        spec.children[1].second.clear();
        CHECK_THROWS_AS(build_hierarchy(spec), ValidationError);
    }
    SUBCASE("unbalanced") {
        HierarchySpec spec;
        spec.levels = {"L2", "L1", "L0"};
        spec.children = {{"T", {"A", "c"}}, {"A", {"a1", "a2"}}};
        spec.bottom_order = {"a1", "a2", "c"};
        CHECK_THROWS_AS(build_hierarchy(spec), ValidationError);
    }
    SUBCASE("bottom order mismatch") {
        auto spec = fig1();
        std::swap(spec.bottom_order[0], spec.bottom_order[1]);
        CHECK_THROWS_AS(build_hierarchy(spec), ValidationError);
    }
    SUBCASE("level count mismatch") {
        auto spec = fig1();
        spec.levels.pop_back();
        CHECK_THROWS_AS(build_hierarchy(spec), ValidationError);
    }
}

TEST_CASE("json round trip") {
    const auto spec = fig1();
    const std::string text = hierarchy_spec_to_json(spec);
    CHECK(hierarchy_spec_from_json(text) == spec);
    CHECK_THROWS_AS(hierarchy_spec_from_json("{not json"), ValidationError);
    CHECK_THROWS_AS(hierarchy_spec_from_json(R"({"levels": ["a"]})"), ValidationError);
    CHECK_THROWS_AS(load_hierarchy_spec("/nonexistent/h.json"), IoError);
}
