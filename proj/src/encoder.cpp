#include "kgprompt/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <json.hpp>
#include <openssl/evp.h>

#include "kgprompt/error.hpp"
#include "kgprompt/http.hpp"

namespace kgprompt {

std::vector<ImageTensor> patch_grid(const ImageTensor& img, std::size_t grid) {
    if (grid == 0 || img.height % grid != 0 || img.width % grid != 0) {
        throw Error(ErrorKind::IndivisibleGrid, std::to_string(img.height) + "x" + std::to_string(img.width) +
                                                    " image cannot be tiled by a " + std::to_string(grid) + "x" +
                                                    std::to_string(grid) + " grid");
    }
    const std::size_t ph = img.height / grid;
    const std::size_t pw = img.width / grid;
    std::vector<ImageTensor> out;
    out.reserve(grid * grid);
    for (std::size_t gy = 0; gy < grid; ++gy) {
        for (std::size_t gx = 0; gx < grid; ++gx) {
            ImageTensor p(ph, pw);
            for (std::size_t y = 0; y < ph; ++y) {
                const float* src = &img.values[((gy * ph + y) * img.width + gx * pw) * ImageTensor::channels];
                std::copy(src, src + pw * ImageTensor::channels, &p.values[y * pw * ImageTensor::channels]);
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

namespace {
// Per-channel normalization used by CLIP-style preprocessing.
constexpr double kPixelMean[3] = {0.48145466, 0.4578275, 0.40821073};
constexpr double kPixelStd[3] = {0.26862954, 0.26130258, 0.27577711};
}  // namespace

ToyEncoder::ToyEncoder(std::size_t image_size, std::size_t grid, std::size_t output_dim, std::uint64_t seed)
    : image_size_(image_size), grid_(grid) {
    if (grid == 0 || image_size % grid != 0) {
        throw Error(ErrorKind::IndivisibleGrid, "image size " + std::to_string(image_size) +
                                                    " is not divisible by grid " + std::to_string(grid));
    }
    if (output_dim == 0) throw Error(ErrorKind::InvalidArgument, "encoder output width must be >= 1");
    const std::size_t side = image_size / grid;
    projection_ = Matrix(output_dim, side * side * ImageTensor::channels);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t r = 0; r < projection_.rows(); ++r) {
        auto row = projection_.row(r);
        for (double& x : row) x = dist(rng);
        scale(row, 1.0 / norm(row));
    }
}

EncoderOutput ToyEncoder::encode(const ImageTensor& img) const {
    if (img.height != image_size_ || img.width != image_size_) {
        throw Error(ErrorKind::DimensionMismatch, "toy encoder expects " + std::to_string(image_size_) + "x" +
                                                      std::to_string(image_size_) + " images");
    }
    EncoderOutput out;
    out.global_feature.assign(output_dim(), 0.0);
    Vector flat(projection_.cols());
    for (const auto& patch : patch_grid(img, grid_)) {
        for (std::size_t i = 0; i < flat.size(); ++i) {
            const std::size_t c = i % ImageTensor::channels;
            flat[i] = (patch.values[i] - kPixelMean[c]) / kPixelStd[c];
        }
        Vector f = matvec(projection_, flat);
        axpy(1.0, f, out.global_feature);
        out.patch_features.push_back(std::move(f));
    }
    scale(out.global_feature, 1.0 / static_cast<double>(out.patch_features.size()));
    return out;
}

std::uint64_t ToyEncoder::checksum() const {
    std::uint64_t h = 1469598103934665603ull;
    for (double x : projection_.flat()) {
        h ^= std::bit_cast<std::uint64_t>(x);
        h *= 1099511628211ull;
    }
    return h;
}

EncoderOutput toy_encode(const ImageTensor& img, std::uint64_t seed, std::size_t grid, std::size_t output_dim) {
    if (img.height != img.width) throw Error(ErrorKind::DimensionMismatch, "toy encoder expects square images");
    return ToyEncoder(img.height, grid, output_dim, seed).encode(img);
}

std::string base64_encode(std::span<const unsigned char> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

HttpEncoderBackend::HttpEncoderBackend(std::string url, std::size_t output_dim, std::size_t grid,
                                       int timeout_seconds)
    : url_(std::move(url)), output_dim_(output_dim), grid_(grid), timeout_seconds_(timeout_seconds) {}

EncoderOutput HttpEncoderBackend::encode(const ImageTensor& img) const {
    if (url_.empty()) throw Error(ErrorKind::BackendUnavailable, "external encoder backend has no encoder_url");
    std::vector<unsigned char> raw(img.values.size() * sizeof(float));
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(img.values[i]);
        for (int b = 0; b < 4; ++b) raw[4 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    nlohmann::json req{{"height", img.height},
                       {"width", img.width},
                       {"channels", ImageTensor::channels},
                       {"dtype", "float32"},
                       {"data", base64_encode(raw)}};
    std::string body;
    try {
        body = http::post_json(url_, req.dump(), {}, timeout_seconds_);
    } catch (const Error& e) {
        throw Error(ErrorKind::BackendUnavailable, std::string("encoder backend: ") + e.what());
    }
    try {
        const auto doc = nlohmann::json::parse(body);
        EncoderOutput out;
        out.global_feature = doc.at("global").get<Vector>();
        out.patch_features = doc.at("patches").get<std::vector<Vector>>();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::BackendUnavailable, std::string("encoder backend response: ") + e.what());
    }
}

EncoderOutput encode(const ImageTensor& img, const EncoderBackend& backend) {
    EncoderOutput out = backend.encode(img);
    const std::size_t m = backend.output_dim();
    auto finite = [](const Vector& v) { return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }); };
    if (out.global_feature.size() != m || !finite(out.global_feature)) {
        throw Error(ErrorKind::EncoderFailure, "encoder global feature has wrong width or non-finite values");
    }
    if (out.patch_features.size() != backend.grid() * backend.grid()) {
        throw Error(ErrorKind::EncoderFailure, "encoder returned " + std::to_string(out.patch_features.size()) +
                                                   " patches, expected " + std::to_string(backend.grid() * backend.grid()));
    }
    for (const auto& p : out.patch_features) {
        if (p.size() != m || !finite(p)) {
            throw Error(ErrorKind::EncoderFailure, "encoder patch feature has wrong width or non-finite values");
        }
    }
    return out;
}

ImageTensor read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open image '" + path + "'");
    auto next_token = [&]() {
        std::string tok;
        char c;
        while (in.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(in, skip);
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                if (!tok.empty()) break;
            } else {
                tok += c;
            }
        }
        return tok;
    };
    if (next_token() != "P6") throw Error(ErrorKind::MalformedFile, "'" + path + "' is not a binary PPM (P6)");
    std::size_t w = 0, h = 0, maxval = 0;
    try {
        w = std::stoul(next_token());
        h = std::stoul(next_token());
        maxval = std::stoul(next_token());
    } catch (const std::exception&) {
        throw Error(ErrorKind::MalformedFile, "'" + path + "' has a malformed PPM header");
    }
    if (maxval != 255 || w == 0 || h == 0) throw Error(ErrorKind::MalformedFile, "'" + path + "' must be 8-bit PPM");
    std::vector<unsigned char> raw(w * h * 3);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw Error(ErrorKind::MalformedFile, "'" + path + "' is truncated");
    }
    ImageTensor img(h, w);
    for (std::size_t i = 0; i < raw.size(); ++i) img.values[i] = static_cast<float>(raw[i]) / 255.0f;
    return img;
}

void write_ppm(const ImageTensor& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write image '" + path + "'");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.values.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const float v = std::clamp(img.values[i], 0.0f, 1.0f);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace kgprompt
