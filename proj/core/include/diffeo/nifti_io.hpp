#pragma once

// Single-file NIfTI-1 (".nii", optionally gzip-compressed) reading and writing.
//
// Little- and big-endian files are read; files are always written little-endian. Paths
// ending in ".gz" are written gzip-compressed; compressed input is detected from the
// 0x1F 0x8B prefix regardless of the file name. Orientation (qform/sform) is carried in
// NiftiHeaderView so it can be copied onto derived outputs, but it is never used to
// resample.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "diffeo/error.hpp"
#include "diffeo/fields.hpp"

namespace diffeo {

enum class NiftiErrorCode {
    io,
    bad_header_size,
    bad_magic,
    unsupported_datatype,
    bad_dimensions,
    truncated,
    wrong_component_count,
};

class NiftiError : public IoError {
public:
    NiftiError(NiftiErrorCode code, const std::string& what) : IoError(what), code_(code) {}
    NiftiErrorCode code() const { return code_; }

private:
    NiftiErrorCode code_;
};

namespace nifti_datatype {
inline constexpr int uint8 = 2;
inline constexpr int int16 = 4;
inline constexpr int int32 = 8;
inline constexpr int float32 = 16;
inline constexpr int float64 = 64;
}  // namespace nifti_datatype

inline constexpr int kNiftiIntentVector = 1007;

struct NiftiOrientation {
    int qform_code = 0;
    int sform_code = 0;
    std::array<float, 3> quatern{};  // b, c, d
    std::array<float, 3> qoffset{};
    float qfac = 1.0f;
    std::array<std::array<float, 4>, 3> srow{};
};

// The header fields the toolkit interprets.
struct NiftiHeaderView {
    std::vector<std::size_t> dims;  // dim[1..dim[0]]
    int datatype = nifti_datatype::float32;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    double scl_slope = 1.0;
    double scl_inter = 0.0;
    int intent_code = 0;
    std::string intent_name;
    std::string description;
    bool byte_swapped = false;
    NiftiOrientation orientation;
};

// Decoded image: header plus every voxel value, slope/intercept applied, in file order.
struct NiftiImage {
    NiftiHeaderView header;
    std::vector<double> values;
};

NiftiImage read_nifti(const std::filesystem::path& path);
// Parses an in-memory file image (already decompressed). Used by read_nifti and by the
// fuzz tests.
NiftiImage parse_nifti(const std::vector<std::uint8_t>& bytes);

struct WriteOptions {
    bool float64 = false;
    // Orientation copied into the output header when set.
    const NiftiOrientation* orientation = nullptr;
};

ScalarVolume read_volume(const std::filesystem::path& path, NiftiHeaderView* header = nullptr);
void write_volume(const ScalarVolume& vol, const std::filesystem::path& path,
                  const WriteOptions& opts = {});

// Vector fields use dim = (nx, ny, nz, 1, 3) with intent code 1007 and the field kind in
// intent_name. Files from other tools without a kind are read as displacements.
VectorField read_field(const std::filesystem::path& path, NiftiHeaderView* header = nullptr);
void write_field(const VectorField& field, const std::filesystem::path& path,
                 const WriteOptions& opts = {});

// 4-D (nx, ny, nz, channels) volume; used for feature stacks.
void write_multichannel(const Grid3& grid, const std::vector<const ScalarVolume*>& channels,
                        const std::filesystem::path& path, const WriteOptions& opts = {});
std::vector<ScalarVolume> read_multichannel(const std::filesystem::path& path);

}  // namespace diffeo
