#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "check_kind.hpp"
#include "fixtures.hpp"
#include "kgprompt/encoder.hpp"

using namespace kgprompt;

namespace {

ImageTensor random_image(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    ImageTensor img(n, n);
    for (float& x : img.values) x = d(rng);
    return img;
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("patch grid tiling") {
    const auto big = patch_grid(ImageTensor(224, 224), 14);
    CHECK(big.size() == 196);
    CHECK(big.front().height == 16);
    CHECK(big.front().width == 16);
    CHECK_KIND(patch_grid(ImageTensor(224, 224), 13), ErrorKind::IndivisibleGrid);
    CHECK_KIND(ToyEncoder(224, 13, 8, 1), ErrorKind::IndivisibleGrid);

    ImageTensor img(4, 4);
    for (std::size_t y = 0; y < 4; ++y) {
        for (std::size_t x = 0; x < 4; ++x) {
            for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = float(100 * c + 10 * y + x);
        }
    }
    const auto p = patch_grid(img, 2);
    REQUIRE(p.size() == 4);
    CHECK(p[0].at(0, 0, 0) == 0.0f);
    CHECK(p[1].at(0, 0, 0) == 2.0f);   // top-right
    CHECK(p[2].at(0, 0, 0) == 20.0f);  // bottom-left
    CHECK(p[3].at(1, 1, 2) == 233.0f);

    // Reassembling the tiles gives the image back.
    ImageTensor back(4, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t y = 0; y < 2; ++y) {
            for (std::size_t x = 0; x < 2; ++x) {
                for (std::size_t c = 0; c < 3; ++c) back.at((k / 2) * 2 + y, (k % 2) * 2 + x, c) = p[k].at(y, x, c);
            }
        }
    }
    CHECK(back == img);
}

TEST_CASE("toy encoder is linear in the normalized pixels") {
    const ToyEncoder enc(8, 2, 6, 4);
    const auto& r = enc.projection();
    for (std::size_t i = 0; i < r.rows(); ++i) CHECK(norm(r.row(i)) == doctest::Approx(1.0));

    const auto img = random_image(8, 1);
    const auto out = enc.encode(img);
    CHECK(out.patch_features.size() == 4);
    CHECK(out.global_feature.size() == 6);
    // Direct reference: project every normalized patch, average.
    const double mean[3] = {0.48145466, 0.4578275, 0.40821073};
    const double stdv[3] = {0.26862954, 0.26130258, 0.27577711};
    const auto patches = patch_grid(img, 2);
    Vector global(6, 0.0);
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t o = 0; o < 6; ++o) {
            long double s = 0;
            for (std::size_t i = 0; i < patches[k].values.size(); ++i) {
                s += r(o, i) * ((patches[k].values[i] - mean[i % 3]) / stdv[i % 3]);
            }
            CHECK(out.patch_features[k][o] == doctest::Approx(double(s)).epsilon(1e-12));
            global[o] += double(s) / 4.0;
        }
    }
    for (std::size_t o = 0; o < 6; ++o) CHECK(out.global_feature[o] == doctest::Approx(global[o]).epsilon(1e-12));

    // Doubling the centred input doubles the features.
    ImageTensor centred(8, 8), doubled(8, 8);
    for (std::size_t i = 0; i < centred.values.size(); ++i) {
        const double c = mean[i % 3] + 0.1 * std::sin(double(i));
        centred.values[i] = float(c);
        doubled.values[i] = float(mean[i % 3] + 2.0 * (double(centred.values[i]) - mean[i % 3]));
    }
    const auto a = enc.encode(centred);
    const auto b = enc.encode(doubled);
    for (std::size_t o = 0; o < 6; ++o) CHECK(b.global_feature[o] == doctest::Approx(2.0 * a.global_feature[o]).epsilon(1e-5));
}

TEST_CASE("mean-colour image maps to zero features") {
    ImageTensor img(8, 8);
    const float mean[3] = {0.48145466f, 0.4578275f, 0.40821073f};
    for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = mean[i % 3];
    const auto out = ToyEncoder(8, 2, 5, 9).encode(img);
    for (double x : out.global_feature) CHECK(std::abs(x) < 1e-6);
}

TEST_CASE("frozen and deterministic") {
    const ToyEncoder enc(8, 2, 6, 4);
    const auto img = random_image(8, 2);
    const auto sum = enc.checksum();
    CHECK(enc.encode(img) == enc.encode(img));
    CHECK(enc.encode(img) == toy_encode(img, 4, 2, 6));
    CHECK(encode(img, enc) == enc.encode(img));
    CHECK(enc.checksum() == sum);
    CHECK(ToyEncoder(8, 2, 6, 5).checksum() != sum);
    CHECK_KIND(enc.encode(random_image(16, 1)), ErrorKind::DimensionMismatch);
}

TEST_CASE("unconfigured external backend") {
    const HttpEncoderBackend none("", 4, 2);
    CHECK_KIND(encode(ImageTensor(4, 4), none), ErrorKind::BackendUnavailable);
    const HttpEncoderBackend refused("http://127.0.0.1:1/encode", 4, 2, 2);
    CHECK_KIND(encode(ImageTensor(4, 4), refused), ErrorKind::BackendUnavailable);
}

TEST_CASE("external backend request and response shapes") {
    nlohmann::json seen;
    int patches = 4;
    fixtures::LocalServer server([&](httplib::Server& s) {
        s.Post("/encode", [&](const httplib::Request& req, httplib::Response& res) {
            seen = nlohmann::json::parse(req.body);
            nlohmann::json out;
            out["global"] = {1.0, 2.0, 3.0};
            out["patches"] = nlohmann::json::array();
            for (int i = 0; i < patches; ++i) out["patches"].push_back({1.0 * i, 0.0, 1.0});
            res.set_content(out.dump(), "application/json");
        });
        s.Post("/garbage", [](const httplib::Request&, httplib::Response& res) { res.set_content("[]", "application/json"); });
    });
    ImageTensor img(2, 2);
    img.values[0] = 1.0f;
    const HttpEncoderBackend backend(server.url("/encode"), 3, 2);
    const auto out = encode(img, backend);
    CHECK(out.global_feature == Vector{1, 2, 3});
    CHECK(out.patch_features.size() == 4);
    CHECK(seen["height"] == 2);
    CHECK(seen["channels"] == 3);
    CHECK(seen["dtype"] == "float32");
    // 12 little-endian floats, first one 1.0f = 00 00 80 3f.
    CHECK(seen["data"].get<std::string>().substr(0, 8) == "AACAPwAA");
    CHECK(seen["data"].get<std::string>().size() == 64);

    patches = 3;
    CHECK_KIND(encode(img, backend), ErrorKind::EncoderFailure);
    const HttpEncoderBackend garbage(server.url("/garbage"), 3, 2);
    CHECK_KIND(encode(img, garbage), ErrorKind::BackendUnavailable);
}

TEST_CASE("base64") {
    const std::string s = "Man";
    CHECK(base64_encode({reinterpret_cast<const unsigned char*>(s.data()), s.size()}) == "TWFu");
    const std::string t = "Ma";
    CHECK(base64_encode({reinterpret_cast<const unsigned char*>(t.data()), t.size()}) == "TWE=");
    CHECK(base64_encode({}) == "");
}

TEST_CASE("ppm round trip") {
    fixtures::TempDir dir;
    ImageTensor img(3, 5);
    for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = float(i % 256) / 255.0f;
    write_ppm(img, dir.file("a.ppm"));
    const auto back = read_ppm(dir.file("a.ppm"));
    CHECK(back.height == 3);
    CHECK(back.width == 5);
    for (std::size_t i = 0; i < img.values.size(); ++i) CHECK(back.values[i] == doctest::Approx(img.values[i]).epsilon(1e-6));
    fixtures::write_file(dir.file("bad.ppm"), "P3\n1 1\n255\n0 0 0\n");
    CHECK_KIND(read_ppm(dir.file("bad.ppm")), ErrorKind::MalformedFile);
    CHECK_KIND(read_ppm(dir.file("none.ppm")), ErrorKind::Io);
}

}
