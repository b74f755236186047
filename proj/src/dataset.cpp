#include "kgprompt/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kgprompt/error.hpp"
#include "kgprompt/text.hpp"

namespace kgprompt {

namespace {
constexpr std::string_view kHeader = "path,label,subject,attack_type,split";
}

std::string_view label_name(Label l) { return l == Label::Real ? "real" : "mask"; }

std::string_view split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Dev: return "dev";
        case Split::Test: return "test";
        case Split::Auto: return "auto";
    }
    return "auto";
}

std::string Manifest::resolve(const ManifestRow& row) const {
    std::filesystem::path p(row.path);
    if (p.is_absolute() || base_dir.empty()) return p.string();
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

Manifest parse_manifest(std::string_view csv, std::string source, std::string base_dir) {
    Manifest m{std::move(source), std::move(base_dir), {}};
    std::istringstream in{std::string(csv)};
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorKind::MalformedFile,
                    (m.source.empty() ? "manifest" : m.source) + ":" + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (text::trim(line) != kHeader) fail("header must be '" + std::string(kHeader) + "'");
            continue;
        }
        if (text::trim(line).empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            cols.push_back(text::trim(std::string_view(line).substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cols.size() != 5) fail("expected 5 columns, found " + std::to_string(cols.size()));
        ManifestRow row;
        row.path = cols[0];
        if (row.path.empty()) fail("empty path");
        if (cols[1] == "real") {
            row.label = Label::Real;
        } else if (cols[1] == "mask") {
            row.label = Label::Mask;
        } else {
            fail("label must be 'real' or 'mask'");
        }
        row.subject = cols[2];
        row.attack_type = cols[3];
        if (cols[4] == "train") {
            row.split = Split::Train;
        } else if (cols[4] == "dev") {
            row.split = Split::Dev;
        } else if (cols[4] == "test") {
            row.split = Split::Test;
        } else if (cols[4] == "auto") {
            row.split = Split::Auto;
        } else {
            fail("split must be train, dev, test or auto");
        }
        m.rows.push_back(std::move(row));
    }
    if (lineno == 0) throw Error(ErrorKind::MalformedFile, "manifest is empty");
    return m;
}

std::string serialize_manifest(const Manifest& m) {
    std::string out(kHeader);
    out += '\n';
    for (const auto& r : m.rows) {
        out += r.path + "," + std::string(label_name(r.label)) + "," + r.subject + "," + r.attack_type + "," +
               std::string(split_name(r.split)) + "\n";
    }
    return out;
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open manifest '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path().string();
    return parse_manifest(ss.str(), path, dir);
}

std::vector<SyntheticImage> make_synthetic(const SyntheticSpec& spec) {
    const std::size_t n = spec.image_size;
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "image size must be >= 1");
    if (spec.attack_types.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one attack type");

    // Class templates come from a fixed seed so every domain and every
    // generator seed agree on what "real" and "mask" look like.
    std::mt19937_64 pattern_rng(0x6b67707270ull);
    std::normal_distribution<double> texture(0.0, spec.pattern_amplitude);
    std::vector<double> templates[2];
    for (auto& t : templates) {
        t.resize(n * n * ImageTensor::channels);
        for (double& x : t) x = texture(pattern_rng);
    }

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    std::normal_distribution<double> subject_offset(0.0, 0.03);
    std::vector<SyntheticImage> out;
    for (std::size_t s = 0; s < spec.subjects; ++s) {
        const std::string subject = spec.subject_prefix + std::to_string(s);
        double offset[3];
        for (double& o : offset) o = subject_offset(rng);
        for (int cls = 0; cls < 2; ++cls) {
            for (std::size_t i = 0; i < spec.images_per_subject_per_class; ++i) {
                SyntheticImage img;
                img.image = ImageTensor(n, n);
                img.label = cls == 0 ? Label::Real : Label::Mask;
                img.subject = subject;
                if (img.label == Label::Mask) img.attack_type = spec.attack_types[i % spec.attack_types.size()];
                for (std::size_t p = 0; p < img.image.values.size(); ++p) {
                    const double mean = 0.5 + spec.domain_shift + offset[p % 3] + templates[cls][p];
                    img.image.values[p] = static_cast<float>(std::clamp(mean + noise(rng), 0.0, 1.0));
                }
                out.push_back(std::move(img));
            }
        }
    }
    return out;
}

}  // namespace kgprompt
