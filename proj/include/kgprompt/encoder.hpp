#pragma once

// Frozen vision encoders. Every backend maps an image to one global feature
// and a row-major grid of per-patch features; none of them has trainable
// state.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kgprompt/linalg.hpp"

namespace kgprompt {

inline constexpr std::size_t kDefaultImageSize = 224;
inline constexpr std::size_t kDefaultPatchGrid = 14;

// Interleaved HWC, 3 channels, values in [0, 1].
struct ImageTensor {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> values;

    static constexpr std::size_t channels = 3;

    ImageTensor() = default;
    ImageTensor(std::size_t h, std::size_t w) : height(h), width(w), values(h * w * channels, 0.0f) {}

    float& at(std::size_t y, std::size_t x, std::size_t c) { return values[(y * width + x) * channels + c]; }
    float at(std::size_t y, std::size_t x, std::size_t c) const { return values[(y * width + x) * channels + c]; }

    bool operator==(const ImageTensor&) const = default;
};

// Non-overlapping grid x grid tiling in row-major order.
std::vector<ImageTensor> patch_grid(const ImageTensor& img, std::size_t grid);

struct EncoderOutput {
    Vector global_feature;
    std::vector<Vector> patch_features;

    bool operator==(const EncoderOutput&) const = default;
};

class EncoderBackend {
public:
    virtual ~EncoderBackend() = default;
    virtual EncoderOutput encode(const ImageTensor& img) const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual std::size_t grid() const = 0;
    // Hash of any fixed weights; used to check the frozen contract.
    virtual std::uint64_t checksum() const = 0;
};

// Linear stand-in: patch feature = R flatten(normalize(patch)) with a seeded
// random R whose rows have unit norm; global feature = mean of patch
// features. Pixels are normalized with the usual CLIP channel mean and std.
class ToyEncoder : public EncoderBackend {
public:
    ToyEncoder(std::size_t image_size, std::size_t grid, std::size_t output_dim, std::uint64_t seed);

    EncoderOutput encode(const ImageTensor& img) const override;
    std::size_t output_dim() const override { return projection_.rows(); }
    std::size_t grid() const override { return grid_; }
    std::uint64_t checksum() const override;

    const Matrix& projection() const noexcept { return projection_; }
    std::size_t image_size() const noexcept { return image_size_; }

private:
    std::size_t image_size_;
    std::size_t grid_;
    Matrix projection_;
};

EncoderOutput toy_encode(const ImageTensor& img, std::uint64_t seed, std::size_t grid, std::size_t output_dim);

// Remote inference endpoint. Request: JSON {"height","width","channels",
// "dtype":"float32","data": base64 of little-endian HWC floats}. Response:
// {"global":[...], "patches":[[...], ...]}. Any failure to reach or parse
// the endpoint is BackendUnavailable.
class HttpEncoderBackend : public EncoderBackend {
public:
    HttpEncoderBackend(std::string url, std::size_t output_dim, std::size_t grid, int timeout_seconds = 30);

    EncoderOutput encode(const ImageTensor& img) const override;
    std::size_t output_dim() const override { return output_dim_; }
    std::size_t grid() const override { return grid_; }
    std::uint64_t checksum() const override { return 0; }

private:
    std::string url_;
    std::size_t output_dim_;
    std::size_t grid_;
    int timeout_seconds_;
};

// Dispatches to the backend and checks the output contract (P^2 patches,
// consistent width, finite values). Throws EncoderFailure otherwise.
EncoderOutput encode(const ImageTensor& img, const EncoderBackend& backend);

std::string base64_encode(std::span<const unsigned char> bytes);

// Binary PPM (P6, maxval 255) I/O.
ImageTensor read_ppm(const std::string& path);
void write_ppm(const ImageTensor& img, const std::string& path);

}  // namespace kgprompt
