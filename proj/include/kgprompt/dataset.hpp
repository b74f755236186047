#pragma once

// Dataset manifests: UTF-8 CSV with header
//   path,label,subject,attack_type,split
// label is "real" or "mask"; split is train, dev, test or auto. Relative
// image paths resolve against the manifest's directory.

#include <cstdint>
#include <string>
#include <vector>

#include "kgprompt/encoder.hpp"

namespace kgprompt {

enum class Label { Real, Mask };
enum class Split { Train, Dev, Test, Auto };

std::string_view label_name(Label l);
std::string_view split_name(Split s);

struct ManifestRow {
    std::string path;  // as written
    Label label = Label::Real;
    std::string subject;
    std::string attack_type;
    Split split = Split::Auto;

    bool operator==(const ManifestRow&) const = default;
};

struct Manifest {
    std::string source;    // file the manifest was read from, if any
    std::string base_dir;  // for resolving relative paths
    std::vector<ManifestRow> rows;

    std::string resolve(const ManifestRow& row) const;
};

Manifest parse_manifest(std::string_view csv, std::string source = {}, std::string base_dir = {});
std::string serialize_manifest(const Manifest& m);
Manifest load_manifest(const std::string& path);

// Seeded Gaussian image clusters for desk-scale runs. Each class has a fixed
// per-pixel Gaussian template (shared by every domain); subjects add a small
// colour offset, the domain adds a global brightness shift, and every pixel
// gets independent Gaussian noise before clamping to [0, 1].
struct SyntheticSpec {
    std::size_t image_size = 64;
    std::size_t subjects = 6;
    std::size_t images_per_subject_per_class = 8;
    double pattern_amplitude = 0.12;
    double noise_std = 0.1;
    double domain_shift = 0.0;
    std::string subject_prefix = "s";
    std::vector<std::string> attack_types{"resin", "silicone"};
    std::uint64_t seed = 1;
};

struct SyntheticImage {
    ImageTensor image;
    Label label = Label::Real;
    std::string subject;
    std::string attack_type;
};

std::vector<SyntheticImage> make_synthetic(const SyntheticSpec& spec);

}  // namespace kgprompt
