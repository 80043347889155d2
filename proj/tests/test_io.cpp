#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "moseg/io.hpp"

using namespace moseg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("moseg_io_" + std::to_string(counter++))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("matches round-trip without coordinates") {
    TempDir dir;
    const MatchList matches{{2, 5}, {{0, 3}, {1, 0}, {4, 2}}};
    const fs::path path = dir.path / io::matches_name(matches.pair);
    io::write_matches(path, matches);
    const auto loaded = io::read_matches(path);
    CHECK(loaded.matches.pair == matches.pair);
    CHECK(loaded.matches.entries == matches.entries);
    CHECK_FALSE(loaded.coordinates.has_value());
}

TEST_CASE("matches round-trip with coordinates") {
    TempDir dir;
    const MatchList matches{{0, 1}, {{0, 1}, {1, 0}}};
    const std::vector<Correspondence> coords{{1.25, -3.5, 640.125, 480.0},
                                             {0.1, 0.2, 0.3, 0.4}};
    const fs::path path = dir.path / io::matches_name(matches.pair);
    io::write_matches(path, matches, &coords);
    const auto loaded = io::read_matches(path);
    REQUIRE(loaded.coordinates.has_value());
    for (std::size_t t = 0; t < coords.size(); ++t) {
        CHECK((*loaded.coordinates)[t].x == coords[t].x);
        CHECK((*loaded.coordinates)[t].y == coords[t].y);
        CHECK((*loaded.coordinates)[t].xp == coords[t].xp);
        CHECK((*loaded.coordinates)[t].yp == coords[t].yp);
    }
}

TEST_CASE("pseg and tseg round-trip") {
    TempDir dir;
    const PartialSegmentation partial{{1, 3}, {0, 1, 2, 1}};
    io::write_pseg(dir.path / io::pseg_name(partial.pair), partial, 2);
    const auto pseg = io::read_pseg(dir.path / io::pseg_name(partial.pair));
    CHECK(pseg.segmentation.pair == partial.pair);
    CHECK(pseg.segmentation.labels == partial.labels);
    CHECK(pseg.d == 2);

    const TotalSegmentation total{4, {0, 1, 2, 2, 1}};
    io::write_tseg(dir.path / io::tseg_name(4), total, 2);
    const auto tseg = io::read_tseg(dir.path / io::tseg_name(4));
    CHECK(tseg.segmentation.image == 4);
    CHECK(tseg.segmentation.labels == total.labels);
}

TEST_CASE("points sidecar round-trips") {
    TempDir dir;
    io::write_points(dir.path / "points.txt", {10, 20, 30});
    const auto counts = io::read_points(dir.path / "points.txt");
    CHECK(counts.at(0) == 10);
    CHECK(counts.at(2) == 30);
}

TEST_CASE("comments and blank lines are tolerated") {
    TempDir dir;
    write_text(dir.path / "pair_0_1.matches",
               "# a comment\n\nm 0 1 2\n0 0  # trailing comment\n\n1 1\n");
    const auto loaded = io::read_matches(dir.path / "pair_0_1.matches");
    CHECK(loaded.matches.entries.size() == 2);
}

TEST_CASE("diagnostics carry file, line, and rule") {
    TempDir dir;
    write_text(dir.path / "pair_0_1.matches", "m 0 1 3\n0 0\n1 1\n");
    try {
        (void)io::read_matches(dir.path / "pair_0_1.matches");
        FAIL("expected ParseError");
    } catch (const io::ParseError& e) {
        CHECK(e.file().filename() == "pair_0_1.matches");
        CHECK(e.line() == 3);
        CHECK(std::string(e.rule()).find("3 match entries") != std::string::npos);
    }

    write_text(dir.path / "bad_header.matches", "x 0 1 2\n");
    CHECK_THROWS_AS((void)io::read_matches(dir.path / "bad_header.matches"), io::ParseError);

    write_text(dir.path / "pair_0_1.pseg", "s 0 1 2 2\n1\n7\n");
    CHECK_THROWS_AS((void)io::read_pseg(dir.path / "pair_0_1.pseg"), io::ParseError);

    write_text(dir.path / "pair_0_2.matches", "m 0 2 2\n0 0 1.0 2.0 3.0 4.0\n1 1\n");
    CHECK_THROWS_AS((void)io::read_matches(dir.path / "pair_0_2.matches"), io::ParseError);
}

TEST_CASE("load_dataset assembles matches, psegs, and counts") {
    TempDir dir;
    const MatchList m01{{0, 1}, {{0, 0}, {1, 1}, {2, 2}}};
    const MatchList m12{{1, 2}, {{0, 1}, {2, 0}}};
    const MatchList m02{{0, 2}, {{0, 0}}};  // matches without pseg -> skipped
    io::write_matches(dir.path / io::matches_name(m01.pair), m01);
    io::write_matches(dir.path / io::matches_name(m12.pair), m12);
    io::write_matches(dir.path / io::matches_name(m02.pair), m02);
    io::write_pseg(dir.path / io::pseg_name(m01.pair), {{0, 1}, {1, 2, 0}}, 2);
    io::write_pseg(dir.path / io::pseg_name(m12.pair), {{1, 2}, {2, 2}}, 2);

    std::vector<std::string> warnings;
    auto loaded = io::load_dataset(dir.path, &warnings);
    CHECK(loaded.dataset.n == 3);
    CHECK(loaded.dataset.d == 2);
    CHECK(loaded.dataset.matches.size() == 2);
    CHECK(loaded.dataset.partials.size() == 2);
    CHECK(loaded.counts_inferred);
    CHECK(loaded.dataset.p == std::vector<int>{3, 3, 2});
    CHECK(warnings.size() == 2);  // skipped pair + inferred counts

    // An explicit points.txt overrides the inference.
    io::write_points(dir.path / "points.txt", {5, 4, 3});
    loaded = io::load_dataset(dir.path);
    CHECK_FALSE(loaded.counts_inferred);
    CHECK(loaded.dataset.p == std::vector<int>{5, 4, 3});
    CHECK(validate_dataset(loaded.dataset).ok());
}

TEST_CASE("missing matches for a pseg is an error") {
    TempDir dir;
    io::write_pseg(dir.path / io::pseg_name({0, 1}), {{0, 1}, {1}}, 2);
    CHECK_THROWS((void)io::load_dataset(dir.path));
}

}  // TEST_SUITE
