#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tilepanel/geometry.hpp"
#include "tilepanel/image.hpp"

using namespace tilepanel;

TEST(Geometry, QuarterTurnCyclesSides) {
    EXPECT_EQ(rotate(Side::Right, Rotation(1)), Side::Top);
    EXPECT_EQ(rotate(Side::Top, Rotation(1)), Side::Left);
    EXPECT_EQ(rotate(Side::Left, Rotation(1)), Side::Bottom);
    EXPECT_EQ(rotate(Side::Bottom, Rotation(1)), Side::Right);
    // The inverse turn walks the cycle the other way.
    EXPECT_EQ(rotate(Side::Right, Rotation(3)), Side::Bottom);
}

TEST(Geometry, RotationComposesModFour) {
    for (int a = -5; a < 9; ++a)
        for (int b = -5; b < 9; ++b) {
            EXPECT_EQ((Rotation(a) + Rotation(b)).quarter_turns(), (((a + b) % 4) + 4) % 4);
            for (const Side s : kAllSides)
                EXPECT_EQ(rotate(rotate(s, Rotation(a)), Rotation(b)), rotate(s, Rotation(a + b)));
        }
}

TEST(Geometry, RotationBetweenIsUnique) {
    for (const Side from : kAllSides)
        for (const Side to : kAllSides) {
            int hits = 0;
            for (int q = 0; q < 4; ++q) hits += rotate(from, Rotation(q)) == to;
            EXPECT_EQ(hits, 1);
            EXPECT_EQ(rotate(from, rotation_between(from, to)), to);
        }
}

TEST(Geometry, EdgeIndexRoundTrips) {
    for (int e = 0; e < 40; ++e) EXPECT_EQ(EdgeRef::from_index(e).index(), e);
    EXPECT_EQ((EdgeRef{3, Side::Bottom}).index(), 15);
}

TEST(Image, RotationMovesEdgesLikeSides) {
    const Image img = fixtures::coordinate_tile(6);
    // After one counterclockwise turn the old right column is the new top row.
    const Image once = rotate(img, Rotation(1));
    for (int c = 0; c < 6; ++c) EXPECT_EQ(once.at(0, c, 1), 5);
    for (int q = 0; q < 4; ++q) {
        EXPECT_EQ(rotate(rotate(img, Rotation(q)), Rotation(q).inverse()), img);
        EXPECT_EQ(rotate(rotate(img, Rotation(q)), Rotation(1)), rotate(img, Rotation(q + 1)));
    }
}

TEST(Image, RotationOfNonSquareSwapsDimensions) {
    const Image img = fixtures::noise_image(3, 5, 1);
    const Image r = rotate(img, Rotation(1));
    EXPECT_EQ(r.height(), 5);
    EXPECT_EQ(r.width(), 3);
    EXPECT_EQ(rotate(rotate(img, Rotation(2)), Rotation(2)), img);
}

TEST(Image, SameSizeResizeIsIdentity) {
    const Image img = fixtures::noise_image(17, 23, 2);
    EXPECT_EQ(resize_bilinear(img, 17, 23), img);
}

TEST(Image, ResizeOfConstantIsConstant) {
    const Image img(31, 45, 90);
    const Image out = resize_bilinear(img, 12, 7);
    for (const auto v : out.data()) EXPECT_EQ(v, 90);
}

TEST(Image, CropRejectsOutOfBounds) {
    const Image img(4, 4);
    EXPECT_THROW(crop(img, 2, 2, 3, 1), InputError);
    EXPECT_NO_THROW(crop(img, 2, 2, 2, 2));
}
