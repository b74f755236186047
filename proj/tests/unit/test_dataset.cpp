#include <doctest.h>

#include <set>

#include "check_kind.hpp"
#include "fixtures.hpp"
#include "kgprompt/dataset.hpp"

using namespace kgprompt;

TEST_SUITE("dataset") {

TEST_CASE("manifest parsing") {
    const auto m = parse_manifest(
        "path,label,subject,attack_type,split\r\n"
        "img/a.ppm,real,s1,,train\n"
        "\n"
        "/abs/b.ppm, mask ,s2,resin,auto\n",
        "m.csv", "/data/set");
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[0] == ManifestRow{"img/a.ppm", Label::Real, "s1", "", Split::Train});
    CHECK(m.rows[1].label == Label::Mask);
    CHECK(m.rows[1].attack_type == "resin");
    CHECK(m.rows[1].split == Split::Auto);
    CHECK(m.resolve(m.rows[0]) == "/data/set/img/a.ppm");
    CHECK(m.resolve(m.rows[1]) == "/abs/b.ppm");
    CHECK(parse_manifest(serialize_manifest(m)).rows == m.rows);
}

TEST_CASE("malformed manifests") {
    CHECK_KIND(parse_manifest(""), ErrorKind::MalformedFile);
    CHECK_KIND(parse_manifest("path,label,subject,split\n"), ErrorKind::MalformedFile);
    const std::string h = "path,label,subject,attack_type,split\n";
    CHECK_KIND(parse_manifest(h + "a.ppm,real,s1,train\n"), ErrorKind::MalformedFile);
    CHECK_KIND(parse_manifest(h + "a.ppm,fake,s1,,train\n"), ErrorKind::MalformedFile);
    CHECK_KIND(parse_manifest(h + "a.ppm,real,s1,,holdout\n"), ErrorKind::MalformedFile);
    CHECK_KIND(parse_manifest(h + ",real,s1,,train\n"), ErrorKind::MalformedFile);
    try {
        parse_manifest(h + "a.ppm,real,s1,,train\nb.ppm,real\n", "x.csv");
        FAIL("expected MalformedFile");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("x.csv:3") != std::string::npos);
    }
    CHECK_KIND(load_manifest("/nonexistent/manifest.csv"), ErrorKind::Io);
}

TEST_CASE("synthetic clusters") {
    SyntheticSpec spec;
    spec.image_size = 16;
    spec.subjects = 3;
    spec.images_per_subject_per_class = 2;
    const auto a = make_synthetic(spec);
    CHECK(a.size() == 12);
    std::set<std::string> subjects, types;
    std::size_t masks = 0;
    for (const auto& im : a) {
        subjects.insert(im.subject);
        CHECK(im.image.height == 16);
        for (float x : im.image.values) {
            CHECK(x >= 0.0f);
            CHECK(x <= 1.0f);
        }
        if (im.label == Label::Mask) {
            ++masks;
            types.insert(im.attack_type);
        } else {
            CHECK(im.attack_type.empty());
        }
    }
    CHECK(subjects == std::set<std::string>{"s0", "s1", "s2"});
    CHECK(types == std::set<std::string>{"resin", "silicone"});
    CHECK(masks == 6);

    const auto b = make_synthetic(spec);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].image == b[i].image);
    spec.seed = 2;
    CHECK(make_synthetic(spec)[0].image != a[0].image);

    // The class templates do not depend on the per-run seed.
    auto class_mean = [](const std::vector<SyntheticImage>& set, Label l) {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& im : set) {
            if (im.label != l) continue;
            s += im.image.values[0];
            ++n;
        }
        return s / double(n);
    };
    spec.images_per_subject_per_class = 40;
    spec.noise_std = 0.0;
    const auto c = make_synthetic(spec);
    spec.seed = 9;
    const auto d = make_synthetic(spec);
    CHECK(std::abs(class_mean(c, Label::Real) - class_mean(d, Label::Real)) < 0.1);

    spec.attack_types.clear();
    CHECK_KIND(make_synthetic(spec), ErrorKind::InvalidArgument);
}

TEST_CASE("synth command writes images and a manifest") {
    fixtures::TempDir dir;
    const auto path = fixtures::write_synthetic(dir.path(), {"--subjects", "2", "--per-class", "2", "--image-size", "8"});
    const auto m = load_manifest(path);
    CHECK(m.rows.size() == 8);
    for (const auto& r : m.rows) CHECK(read_ppm(m.resolve(r)).width == 8);
}

}
