#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "n2k/config.hpp"
#include "n2k/image_io.hpp"
#include "n2k/patches.hpp"
#include "n2k/rng.hpp"

#include "../oracles.hpp"
#include "../png_fixture.hpp"

using n2k::Tensor;

namespace {

Tensor random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    Tensor t({1, 1, h, w});
    n2k::Rng rng(seed);
    for (std::size_t k = 0; k < t.size(); ++k) t.data()[k] = rng.next_uniform();
    return t;
}

}  // namespace

TEST_CASE("extract_patches: exact tilings and the count formula") {
    const Tensor whole = random_image(64, 64, 1);
    const auto one = n2k::extract_patches(whole, 64, 64, 5);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == whole);

    const Tensor big = random_image(128, 128, 2);
    const auto four = n2k::extract_patches(big, 64, 64, 9);
    REQUIRE(four.size() == 4);
    // disjoint tiles reassemble the image
    Tensor rebuilt({1, 1, 128, 128});
    std::size_t idx = 0;
    for (std::size_t ti = 0; ti < 2; ++ti)
        for (std::size_t tj = 0; tj < 2; ++tj, ++idx)
            for (std::size_t i = 0; i < 64; ++i)
                for (std::size_t j = 0; j < 64; ++j)
                    rebuilt.at(0, 0, ti * 64 + i, tj * 64 + j) = four[idx].at(0, 0, i, j);
    CHECK(rebuilt == big);

    // count = (floor((H-ps)/stride)+1) * (floor((W-ps)/stride)+1), any seed
    n2k::Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t h = 16 + rng.next_below(60);
        const std::size_t w = 16 + rng.next_below(60);
        const std::size_t ps = 8 + rng.next_below(8);
        const std::size_t stride = 1 + rng.next_below(12);
        const Tensor img = random_image(h, w, 100 + trial);
        const auto patches = n2k::extract_patches(img, ps, stride, trial);
        const std::size_t want = ((h - ps) / stride + 1) * ((w - ps) / stride + 1);
        CHECK(patches.size() == want);
        for (const auto& p : patches) CHECK(p.shape() == n2k::Shape{1, 1, ps, ps});
    }

    CHECK_THROWS_AS((void)n2k::extract_patches(random_image(16, 16, 4), 32, 32, 0),
                    n2k::ConfigError);
    // same seed, same patches
    const auto a = n2k::extract_patches(big, 48, 32, 77);
    const auto b = n2k::extract_patches(big, 48, 32, 77);
    CHECK(a == b);
}

TEST_CASE("dihedral: identity, exact inverses, 8 distinct transforms, closure") {
    Tensor asym({1, 1, 2, 2});
    asym.at(0, 0, 0, 0) = 1.0;
    asym.at(0, 0, 0, 1) = 2.0;
    asym.at(0, 0, 1, 0) = 3.0;
    asym.at(0, 0, 1, 1) = 4.0;

    CHECK(n2k::augment_dihedral(asym, 0) == asym);

    std::set<std::vector<double>> seen;
    for (int k = 0; k < 8; ++k) {
        const Tensor t = n2k::augment_dihedral(asym, k);
        CHECK(n2k::augment_dihedral_inverse(t, k) == asym);
        seen.insert({t.data()[0], t.data()[1], t.data()[2], t.data()[3]});
    }
    CHECK(seen.size() == 8);  // pairwise distinct on an asymmetric patch

    // closure: composing any two transforms lands on a third
    auto flat = [&](const Tensor& t) {
        return std::vector<double>{t.data()[0], t.data()[1], t.data()[2], t.data()[3]};
    };
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            const Tensor composed = n2k::augment_dihedral(n2k::augment_dihedral(asym, j), i);
            bool found = false;
            for (int k = 0; k < 8; ++k)
                found = found || flat(n2k::augment_dihedral(asym, k)) == flat(composed);
            CHECK(found);
        }

    CHECK_THROWS_AS((void)n2k::augment_dihedral(asym, 8), n2k::ConfigError);
    CHECK_THROWS_AS((void)n2k::augment_dihedral(asym, -1), n2k::ConfigError);

    // rectangular patches transform consistently
    const Tensor rect = random_image(3, 5, 5);
    for (int k = 0; k < 8; ++k)
        CHECK(n2k::augment_dihedral_inverse(n2k::augment_dihedral(rect, k), k) == rect);
}

TEST_CASE("pgm: decode anchors, canonical round trip, malformed inputs") {
    const std::string bytes = std::string("P5\n2 2\n255\n") + '\0' + char(128) + char(255) +
                              char(64);
    const Tensor img = n2k::decode_pgm(bytes);
    CHECK(img.shape() == n2k::Shape{1, 1, 2, 2});
    CHECK(img.at(0, 0, 0, 0) == 0.0);
    CHECK(img.at(0, 0, 0, 1) == 128.0 / 255.0);
    CHECK(img.at(0, 0, 1, 0) == 1.0);
    CHECK(img.at(0, 0, 1, 1) == 64.0 / 255.0);

    // encode(decode(f)) == f for canonical files
    CHECK(n2k::encode_pgm(img) == bytes);

    // comments in the header are fine
    const std::string commented = std::string("P5\n# made by hand\n2 1 255\n") + char(7) + char(9);
    CHECK(n2k::decode_pgm(commented).shape() == n2k::Shape{1, 1, 1, 2});

    CHECK_THROWS_AS((void)n2k::decode_pgm("P6\n1 1\n255\nX"), n2k::ParseError);
    CHECK_THROWS_WITH_AS((void)n2k::decode_pgm("P5\n2 2\n"), doctest::Contains("byte"),
                         n2k::ParseError);
    CHECK_THROWS_AS((void)n2k::decode_pgm("P5\n2 2\n255\nab"), n2k::ParseError);  // short raster
    CHECK_THROWS_AS((void)n2k::decode_pgm("P5\n2 2\n65535\n????????"), n2k::ConfigError);
}

TEST_CASE("pgm/png: quantization rounds half away from zero and clamps") {
    Tensor t({1, 1, 1, 4});
    t.data()[0] = -0.2;           // clamps to 0
    t.data()[1] = 1.7;            // clamps to 255
    t.data()[2] = 0.5 / 255.0;    // rounds up to 1
    t.data()[3] = 127.5 / 255.0;  // rounds up to 128
    const std::string bytes = n2k::encode_pgm(t);
    const std::string raster = bytes.substr(bytes.size() - 4);
    CHECK(std::uint8_t(raster[0]) == 0);
    CHECK(std::uint8_t(raster[1]) == 255);
    CHECK(std::uint8_t(raster[2]) == 1);
    CHECK(std::uint8_t(raster[3]) == 128);
}

TEST_CASE("png: encode/decode round trip preserves every pixel") {
    Tensor img = random_image(23, 17, 6);
    img.data()[0] = 0.0;
    img.data()[1] = 1.0;
    const std::string bytes = n2k::encode_png(img);
    const Tensor back = n2k::decode_png(bytes);
    REQUIRE(back.shape() == img.shape());
    for (std::size_t e = 0; e < img.size(); ++e)
        CHECK(back.data()[e] == double(n2k::quantize_u8(img.data()[e])) / 255.0);

    // second decode of a re-encode is bit-stable
    CHECK(n2k::encode_png(back) == n2k::encode_png(n2k::decode_png(n2k::encode_png(back))));
}

TEST_CASE("png: decodes an externally produced file with filters 0..4") {
    const std::string bytes(reinterpret_cast<const char*>(fixture::kPngBytes),
                            sizeof(fixture::kPngBytes));
    const Tensor img = n2k::decode_png(bytes);
    REQUIRE(img.shape() == n2k::Shape{1, 1, fixture::kPngHeight, fixture::kPngWidth});
    for (std::size_t k = 0; k < img.size(); ++k)
        CHECK(img.data()[k] == double(fixture::kPngPixels[k]) / 255.0);
}

TEST_CASE("png: corrupt and unsupported inputs are rejected") {
    const std::string good = n2k::encode_png(random_image(8, 8, 7));
    std::string bad_crc = good;
    bad_crc[bad_crc.size() - 5] ^= 0x40;  // flip a bit in IEND's crc
    CHECK_THROWS_AS((void)n2k::decode_png(bad_crc), n2k::ParseError);

    std::string truncated = good.substr(0, good.size() / 2);
    CHECK_THROWS_AS((void)n2k::decode_png(truncated), n2k::ParseError);

    CHECK_THROWS_AS((void)n2k::decode_png("not a png"), n2k::ParseError);

    // color-type 2 (rgb) is unsupported: patch IHDR and fix its crc
    std::string rgb = good;
    rgb[8 + 8 + 9] = 2;
    // recompute the IHDR crc
    const std::uint32_t crc = std::uint32_t(
        ::crc32(0, reinterpret_cast<const Bytef*>(rgb.data() + 12), uInt(4 + 13)));
    rgb[12 + 17 + 0] = char((crc >> 24) & 0xff);
    rgb[12 + 17 + 1] = char((crc >> 16) & 0xff);
    rgb[12 + 17 + 2] = char((crc >> 8) & 0xff);
    rgb[12 + 17 + 3] = char(crc & 0xff);
    CHECK_THROWS_AS((void)n2k::decode_png(rgb), n2k::ConfigError);
}

TEST_CASE("image dispatch: magic-based decode, extension-based encode") {
    const Tensor img = random_image(9, 11, 8);
    CHECK(n2k::decode_image_bytes(n2k::encode_pgm(img)).shape() == img.shape());
    CHECK(n2k::decode_image_bytes(n2k::encode_png(img)).shape() == img.shape());
    CHECK_THROWS_AS((void)n2k::decode_image_bytes("JFIF...."), n2k::ConfigError);
}

TEST_CASE("config: defaults, round trip, unknown keys rejected") {
    const n2k::TrainConfig defaults;
    CHECK(defaults.patch_size == 64);
    CHECK(defaults.batch_size == 64);
    CHECK(defaults.lr == 3e-2);
    CHECK(defaults.lambda == 10.0);
    CHECK(defaults.width == 32);
    CHECK(defaults.depth == 4);
    CHECK(defaults.loss == "adss");

    const std::string text =
        "# desk run\n"
        "epochs = 3\n"
        "lambda = 5\n"
        "loss = adss-tv\n"
        "alpha = 0.01\n"
        "noise.kind = salt-pepper\n"
        "noise.density = 0.3\n"
        "seed = 9\n";
    const n2k::TrainConfig cfg = n2k::parse_train_config(text);
    CHECK(cfg.epochs == 3);
    CHECK(cfg.lambda == 5.0);
    CHECK(cfg.loss == "adss-tv");
    CHECK(cfg.alpha == 0.01);
    CHECK(cfg.noise_kind == "salt-pepper");
    CHECK(cfg.density == 0.3);
    CHECK(cfg.seed == 9);
    CHECK(!cfg.precorrupted());
    CHECK(cfg.noise().kind == n2k::NoiseKind::kSaltPepper);

    // resolved text parses back to the same config
    const n2k::TrainConfig again = n2k::parse_train_config(n2k::resolved_config_text(cfg));
    CHECK(n2k::resolved_config_text(again) == n2k::resolved_config_text(cfg));

    CHECK_THROWS_WITH_AS((void)n2k::parse_train_config("patchsize = 64\n"),
                         doctest::Contains("unknown key"), n2k::ConfigError);
    CHECK_THROWS_AS((void)n2k::parse_train_config("epochs 3\n"), n2k::ConfigError);
    CHECK_THROWS_AS((void)n2k::parse_train_config("lr = fast\n"), n2k::ConfigError);
    CHECK_THROWS_AS((void)n2k::parse_train_config("loss = huber\n"), n2k::ConfigError);
    CHECK_THROWS_AS((void)n2k::parse_train_config("noise.kind = salt-pepper\nnoise.density = 2\n"),
                    n2k::ConfigError);
}

TEST_CASE("train settings derive from the config") {
    n2k::TrainConfig cfg;
    cfg.loss = "masked-l2";
    cfg.mask_rate = 0.25;
    cfg.lr = 0.01;
    cfg.decay_interval = 500;
    const n2k::TrainSettings s = cfg.settings();
    CHECK(s.loss.kind == n2k::LossKind::kMaskedL2);
    CHECK(s.loss.mask_rate == 0.25);
    CHECK(s.optim.base_lr == 0.01);
    CHECK(s.optim.decay_interval == 500);
}
