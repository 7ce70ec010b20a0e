#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "tilepanel/bundle_io.hpp"

using namespace tilepanel;

TEST(BundleIo, RoundTripPreservesEverything) {
    const auto dir = fixtures::scratch_dir("bundle_rt");
    PuzzleBundle b = scramble(cut_image(fixtures::noise_image(100, 150, 1), 2, 3, 50), Variant::Type2, 4);
    b.provenance = "noise seed=1";
    write_bundle(dir / "b", b);
    const PuzzleBundle back = read_bundle(dir / "b");
    EXPECT_EQ(back.tiles, b.tiles);
    EXPECT_EQ(back.rows, b.rows);
    EXPECT_EQ(back.cols, b.cols);
    EXPECT_EQ(*back.ground_truth, *b.ground_truth);
    EXPECT_EQ(back.provenance, b.provenance);
}

TEST(BundleIo, ManifestFollowsTheDocumentedSchema) {
    const auto dir = fixtures::scratch_dir("bundle_schema");
    PuzzleBundle b = cut_image(fixtures::noise_image(50, 100, 2), 1, 2, 50);
    write_bundle(dir / "b", b);
    const auto m = nlohmann::json::parse(read_text(dir / "b" / "manifest.json"));
    EXPECT_EQ(m["version"], 1);
    EXPECT_EQ(m["rows"], 1);
    EXPECT_EQ(m["cols"], 2);
    EXPECT_EQ(m["tile_px"], 50);
    EXPECT_EQ(m["tiles"][1]["id"], 1);
    EXPECT_TRUE(std::filesystem::exists(dir / "b" / m["tiles"][1]["file"].get<std::string>()));
    EXPECT_EQ(m["ground_truth"][1], (nlohmann::json{{"tile", 1}, {"row", 0}, {"col", 1}, {"rot", 0}}));
    EXPECT_TRUE(m["provenance"].is_string());
}

TEST(BundleIo, NullDimensionsAndGroundTruth) {
    const auto dir = fixtures::scratch_dir("bundle_null");
    PuzzleBundle b = cut_image(fixtures::noise_image(50, 100, 3), 1, 2, 50);
    b.rows.reset();
    b.cols.reset();
    b.ground_truth.reset();
    write_bundle(dir / "b", b);
    const auto m = nlohmann::json::parse(read_text(dir / "b" / "manifest.json"));
    EXPECT_TRUE(m["rows"].is_null());
    EXPECT_TRUE(m["ground_truth"].is_null());
    const PuzzleBundle back = read_bundle(dir / "b");
    EXPECT_FALSE(back.dims_known());
    EXPECT_FALSE(back.ground_truth.has_value());
}

TEST(BundleIo, OverwritesExistingBundle) {
    const auto dir = fixtures::scratch_dir("bundle_over");
    write_bundle(dir / "b", cut_image(fixtures::noise_image(100, 100, 4), 2, 2, 50));
    const PuzzleBundle second = cut_image(fixtures::noise_image(50, 100, 5), 1, 2, 50);
    write_bundle(dir / "b", second);
    EXPECT_EQ(read_bundle(dir / "b").tiles, second.tiles);
    EXPECT_FALSE(std::filesystem::exists(dir / "b" / "tile_0002.png"));
}

TEST(BundleIo, RejectsMalformedManifests) {
    const auto dir = fixtures::scratch_dir("bundle_bad");
    write_bundle(dir / "b", cut_image(fixtures::noise_image(100, 100, 6), 2, 2, 50));
    auto m = nlohmann::json::parse(read_text(dir / "b" / "manifest.json"));

    auto rewrite = [&](const nlohmann::json& j) { std::ofstream(dir / "b" / "manifest.json") << j.dump(); };
    auto bad_version = m;
    bad_version["version"] = 2;
    rewrite(bad_version);
    EXPECT_THROW(read_bundle(dir / "b"), InputError);

    auto bad_rot = m;
    bad_rot["ground_truth"][0]["rot"] = 4;
    rewrite(bad_rot);
    EXPECT_THROW(read_bundle(dir / "b"), InputError);

    auto missing = m;
    missing.erase("tile_px");
    rewrite(missing);
    EXPECT_THROW(read_bundle(dir / "b"), InputError);

    std::ofstream(dir / "b" / "manifest.json") << "{ not json";
    EXPECT_THROW(read_bundle(dir / "b"), InputError);
    EXPECT_THROW(read_bundle(dir / "nope"), InputError);
}

TEST(PngIo, RoundTripIsLossless) {
    const auto dir = fixtures::scratch_dir("png");
    const Image img = fixtures::noise_image(13, 29, 7);
    write_png(dir / "x.png", img);
    EXPECT_EQ(read_png(dir / "x.png"), img);
    EXPECT_THROW(read_png(dir / "missing.png"), InputError);
}
