#pragma once

// Five-channel feature stacks: an image followed by the Jacobian determinant and the three
// curl components of a transformation (or the mean of those over several transformations).

#include <filesystem>
#include <vector>

#include "diffeo/fields.hpp"
#include "diffeo/nifti_io.hpp"

namespace diffeo {

inline const std::vector<std::string> kFeatureChannelNames{"img", "jd", "cv1", "cv2", "cv3"};

FeatureStack moving_stack(const ScalarVolume& image, const VectorField& phi);
FeatureStack fixed_stack(const ScalarVolume& image, const std::vector<VectorField>& phis);

// Writes a 4-D float32 NIfTI (nx, ny, nz, channels) plus a JSON sidecar listing the
// channel names in order. Returns the sidecar path.
std::filesystem::path export_stack(const FeatureStack& stack, const std::filesystem::path& path,
                                   const WriteOptions& opts = {});
FeatureStack import_stack(const std::filesystem::path& path);

// "x.nii.gz" / "x.nii" -> "x.json".
std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace diffeo
