#include <bit>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>

#include "doctest.h"
#include "laneaf/io.hpp"
#include "laneaf/synth.hpp"

using namespace laneaf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "laneaf_io_test";
    fs::create_directories(dir);
    return dir;
}

LabelMask random_mask(std::uint64_t seed, int h, int w) {
    SplitMix64 rng(seed);
    LabelMask mask(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            mask.set_label(y, x, std::uint8_t(rng.uniform_int(0, 255)));
    return mask;
}

std::uint32_t bits(float f) { return std::bit_cast<std::uint32_t>(f); }

}  // namespace

TEST_CASE("pgm encodes header plus raw raster") {
    const LabelMask mask = random_mask(1, 74, 205);
    const std::string data = encode_pgm(mask);
    CHECK(data.size() == 14 + 74 * 205);  // "P5\n205 74\n255\n"
    CHECK(data.substr(0, 14) == "P5\n205 74\n255\n");
    CHECK(decode_pgm(data) == mask);

    const LabelMask tiny(1, 1);
    CHECK(encode_pgm(tiny) == std::string("P5\n1 1\n255\n") + '\0');
}

TEST_CASE("pgm decoding accepts comments and flexible whitespace") {
    const std::string raster(6, '\x7f');
    const LabelMask a = decode_pgm("P5\n# a comment\n3 2\n255\n" + raster);
    CHECK(a.height() == 2);
    CHECK(a.width() == 3);
    CHECK(a.label(1, 2) == 0x7f);
    const LabelMask b = decode_pgm("P5 3\t2\r\n# x\n255 " + raster);
    CHECK(a == b);
}

TEST_CASE("pgm decoding rejects malformed input") {
    const LabelMask mask = random_mask(2, 4, 5);
    const std::string good = encode_pgm(mask);

    CHECK_THROWS_AS(decode_pgm(""), io_error);
    CHECK_THROWS_AS(decode_pgm("P6" + good.substr(2)), io_error);
    CHECK_THROWS_AS(decode_pgm("P5\n5 4\n65535\n" + std::string(20, 'x')), io_error);
    CHECK_THROWS_AS(decode_pgm("P5\n5 x\n255\n" + std::string(20, 'x')), io_error);
    CHECK_THROWS_AS(decode_pgm(good.substr(0, good.size() - 1)), io_error);
    CHECK_THROWS_AS(decode_pgm(good + "x"), io_error);
    CHECK_THROWS_AS(decode_pgm("P5\n0 4\n255\n"), io_error);
    // dimension product above the pixel cap
    CHECK_THROWS_AS(decode_pgm("P5\n70000 70000\n255\n"), io_error);
}

TEST_CASE("laf fields round-trip bit for bit") {
    AffinityFields fields(10, 10);
    SplitMix64 rng(3);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) {
            fields.haf.at(y, x) = {float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))};
            fields.vaf.at(y, x) = {float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))};
        }
    // special payloads survive unchanged
    fields.haf.at(0, 0) = {std::numeric_limits<float>::quiet_NaN(), -0.0f};
    fields.vaf.at(9, 9) = {std::numeric_limits<float>::infinity(), 1e-42f};

    const std::string data = encode_laf(fields);
    CHECK(data.size() == 1612);  // 12 header + 10*10*16 payload
    CHECK(data.substr(0, 4) == "LAF1");

    const AffinityFields back = decode_laf(data);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) {
            CHECK(bits(back.haf.at(y, x).x) == bits(fields.haf.at(y, x).x));
            CHECK(bits(back.haf.at(y, x).y) == bits(fields.haf.at(y, x).y));
            CHECK(bits(back.vaf.at(y, x).x) == bits(fields.vaf.at(y, x).x));
            CHECK(bits(back.vaf.at(y, x).y) == bits(fields.vaf.at(y, x).y));
        }
}

TEST_CASE("laf decoding rejects malformed input") {
    const std::string good = encode_laf(AffinityFields(3, 4));
    CHECK_THROWS_AS(decode_laf(""), io_error);
    CHECK_THROWS_AS(decode_laf("LAF"), io_error);
    CHECK_THROWS_AS(decode_laf("XXXX" + good.substr(4)), io_error);
    CHECK_THROWS_AS(decode_laf(good.substr(0, good.size() - 4)), io_error);
    CHECK_THROWS_AS(decode_laf(good + "zz"), io_error);

    std::string zero_dim = good.substr(0, 4);
    detail::put_u32le(zero_dim, 0);
    detail::put_u32le(zero_dim, 4);
    CHECK_THROWS_AS(decode_laf(zero_dim), io_error);
}

TEST_CASE("lane sets round-trip through json exactly") {
    CHECK(encode_lanes_json(LaneSet{}) == "{\"lanes\":[]}\n");
    CHECK(decode_lanes_json("{\"lanes\":[]}").lanes.empty());

    LaneSet set;
    SplitMix64 rng(8);
    for (int i = 0; i < 4; ++i) {
        Lane lane;
        lane.id = i + 1;
        int row = 73;
        for (int j = 0; j < 20; ++j) {
            lane.points.push_back({row, rng.uniform(0.0, 205.0)});
            row -= rng.uniform_int(1, 4);
        }
        set.lanes.push_back(std::move(lane));
    }

    const LaneSet back = decode_lanes_json(encode_lanes_json(set));
    REQUIRE(back.lanes.size() == set.lanes.size());
    for (std::size_t i = 0; i < set.lanes.size(); ++i) {
        CHECK(back.lanes[i].id == set.lanes[i].id);
        REQUIRE(back.lanes[i].points.size() == set.lanes[i].points.size());
        for (std::size_t j = 0; j < set.lanes[i].points.size(); ++j) {
            CHECK(back.lanes[i].points[j].row == set.lanes[i].points[j].row);
            // %.17g carries the full double, so equality is exact
            CHECK(back.lanes[i].points[j].col == set.lanes[i].points[j].col);
        }
    }
}

TEST_CASE("lanes json rejects structural and semantic errors") {
    CHECK_THROWS_AS(decode_lanes_json("not json"), io_error);
    CHECK_THROWS_AS(decode_lanes_json("[]"), io_error);
    CHECK_THROWS_AS(decode_lanes_json("{\"other\":[]}"), io_error);
    CHECK_THROWS_AS(decode_lanes_json("{\"lanes\":[{\"id\":1.5,\"points\":[]}]}"), io_error);
    CHECK_THROWS_AS(decode_lanes_json("{\"lanes\":[{\"id\":1}]}"), io_error);
    CHECK_THROWS_AS(decode_lanes_json("{\"lanes\":[{\"id\":1,\"points\":[[1.5,2]]}]}"),
                    io_error);
    CHECK_THROWS_AS(decode_lanes_json("{\"lanes\":[{\"id\":1,\"points\":[[1,2,3]]}]}"),
                    io_error);
    // rows must be strictly decreasing bottom to top
    CHECK_THROWS_AS(
        decode_lanes_json("{\"lanes\":[{\"id\":1,\"points\":[[5,1],[6,1]]}]}"), io_error);
    // duplicate ids
    CHECK_THROWS_AS(decode_lanes_json("{\"lanes\":[{\"id\":1,\"points\":[[5,1]]},"
                                      "{\"id\":1,\"points\":[[5,2]]}]}"),
                    io_error);
}

TEST_CASE("file helpers write and reread, and missing paths are io errors") {
    const fs::path dir = temp_dir();

    const LabelMask mask = random_mask(4, 20, 30);
    write_mask(mask, (dir / "m.pgm").string());
    CHECK(read_mask((dir / "m.pgm").string()) == mask);

    AffinityFields fields(6, 7);
    fields.vaf.at(5, 6) = {0.25f, -1.0f};
    write_fields(fields, (dir / "f.laf").string());
    const AffinityFields rf = read_fields((dir / "f.laf").string());
    CHECK(bits(rf.vaf.at(5, 6).x) == bits(0.25f));

    LaneSet lanes;
    lanes.lanes.push_back({3, {{7, 1.25}, {2, 4.0}}});
    write_lanes_json(lanes, (dir / "l.json").string());
    CHECK(read_lanes_json((dir / "l.json").string()).lanes.size() == 1);

    CHECK_THROWS_AS(read_mask((dir / "absent.pgm").string()), io_error);
    CHECK_THROWS_AS(read_fields((dir / "absent.laf").string()), io_error);
    CHECK_THROWS_AS(read_lanes_json((dir / "absent.json").string()), io_error);

    // reader errors carry the offending path
    try {
        read_mask((dir / "absent.pgm").string());
        CHECK(false);
    } catch (const io_error& e) {
        CHECK(std::string(e.what()).find("absent.pgm") != std::string::npos);
    }

    Grid<Rgb> img(2, 2, Rgb{10, 20, 30});
    write_ppm(img, (dir / "o.ppm").string());
    const std::string ppm = detail::read_file((dir / "o.ppm").string());
    CHECK(ppm == std::string("P6\n2 2\n255\n") + "\x0a\x14\x1e\x0a\x14\x1e\x0a\x14\x1e\x0a\x14\x1e");

    fs::remove_all(dir);
}
