#include "gmor/io.hpp"
#include "gmor/synthetic.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace gmor;
using Catch::Approx;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("gmor_io_test_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("correspondence files round trip losslessly", "[io]") {
    TempDir tmp;
    detail::Rng rng(70);
    std::vector<WeightedCorrespondence> corr;
    for (int i = 0; i < 50; ++i)
        corr.push_back(make_correspondence(rng.in_sphere(1.0), rng.in_sphere(1.0),
                                           rng.uniform(0.01, 1.0)));
    const auto path = tmp.file("corr.txt");
    write_correspondences(path, corr);
    const auto back = read_correspondences(path);
    REQUIRE(back.size() == corr.size());
    for (std::size_t i = 0; i < corr.size(); ++i) {
        CHECK(back[i].p.x == corr[i].p.x);
        CHECK(back[i].p.y == corr[i].p.y);
        CHECK(back[i].p.z == corr[i].p.z);
        CHECK(back[i].q.x == corr[i].q.x);
        CHECK(back[i].q.y == corr[i].q.y);
        CHECK(back[i].q.z == corr[i].q.z);
        CHECK(back[i].weight == corr[i].weight);
        CHECK(back[i].s.x == corr[i].s.x);
    }
}

TEST_CASE("correspondence parsing accepts comments and default weights", "[io]") {
    TempDir tmp;
    const auto path = tmp.file("corr.txt");
    {
        std::ofstream out(path);
        out << "# a comment line\n";
        out << "0 0 0 1 0 0\n";
        out << "1 2 3 4 5 6 0.5  # trailing comment\n";
        out << "\n";
    }
    const auto corr = read_correspondences(path);
    REQUIRE(corr.size() == 2);
    CHECK(corr[0].weight == 1.0);
    CHECK(corr[1].weight == 0.5);
}

TEST_CASE("correspondence parse errors carry line numbers", "[io]") {
    TempDir tmp;
    const auto path = tmp.file("bad.txt");
    {
        std::ofstream out(path);
        out << "0 0 0 1 0 0\n";
        out << "0 0 0 oops 0 0\n";
    }
    try {
        read_correspondences(path);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    const auto short_path = tmp.file("short.txt");
    {
        std::ofstream out(short_path);
        out << "0 0 0 1\n";
    }
    CHECK_THROWS_AS(read_correspondences(short_path), ParseError);
    CHECK_THROWS_AS(read_correspondences(tmp.file("missing.txt")), ParseError);
}

TEST_CASE("feature files infer and enforce the dimension", "[io]") {
    TempDir tmp;
    const auto path = tmp.file("features.txt");
    {
        std::ofstream out(path);
        out << "# x y z f1 f2\n";
        out << "0 0 0 1 2\n";
        out << "1 0 0 3 4\n";
    }
    const auto pts = read_feature_points(path);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].feature == std::vector<double>{1, 2});

    const auto bad = tmp.file("bad_features.txt");
    {
        std::ofstream out(bad);
        out << "0 0 0 1 2\n";
        out << "1 0 0 3\n";  // dimension mismatch
    }
    try {
        read_feature_points(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    const auto zero = tmp.file("zero_features.txt");
    {
        std::ofstream out(zero);
        out << "0 0 0 0 0\n";
    }
    CHECK_THROWS_AS(read_feature_points(zero), ParseError);
}

TEST_CASE("result documents round trip losslessly", "[io]") {
    TempDir tmp;
    detail::Rng rng(71);
    ResultDocument doc;
    doc.rotation = rng.rotation();
    doc.translation = rng.in_sphere(2.0);
    doc.consensus_weight = 123.4567890123456789;
    doc.inlier_count = 321;
    doc.translation_only = 0;
    doc.timings_ms = {1.25, 2.5, 0.125};
    doc.branches_expanded = {77, 13};

    const auto path = tmp.file("result.txt");
    write_result_document(path, doc);
    const auto back = read_result_document(path);
    for (int i = 0; i < 9; ++i)
        CHECK(back.rotation.m[static_cast<std::size_t>(i)] ==
              doc.rotation.m[static_cast<std::size_t>(i)]);
    CHECK(back.translation.x == doc.translation.x);
    CHECK(back.translation.y == doc.translation.y);
    CHECK(back.translation.z == doc.translation.z);
    CHECK(*back.consensus_weight == *doc.consensus_weight);
    CHECK(*back.inlier_count == *doc.inlier_count);
    CHECK(*back.timings_ms == *doc.timings_ms);
    CHECK(*back.branches_expanded == *doc.branches_expanded);
}

TEST_CASE("truth documents only need the transform", "[io]") {
    TempDir tmp;
    ResultDocument doc;
    doc.rotation = rodrigues({0, 0, 1}, 0.3);
    doc.translation = {1, 2, 3};
    const auto path = tmp.file("truth.txt");
    write_result_document(path, doc);
    const auto back = read_result_document(path);
    CHECK_FALSE(back.consensus_weight.has_value());
    CHECK(back.transform().translation.y == 2.0);

    const auto bad = tmp.file("incomplete.txt");
    {
        std::ofstream out(bad);
        out << "translation 1 2 3\n";
    }
    CHECK_THROWS_AS(read_result_document(bad), ParseError);

    const auto unknown = tmp.file("unknown.txt");
    {
        std::ofstream out(unknown);
        out << "rotation 1 0 0 0 1 0 0 0 1\ntranslation 0 0 0\nbogus_key 1\n";
    }
    CHECK_THROWS_AS(read_result_document(unknown), ParseError);
}
