#pragma once

// Core lattice, scalar volume and vector field types.
//
// Every field is stored in voxel coordinates with x-fastest linear order:
// index(i, j, k) = i + nx * (j + ny * k). Vector fields interleave their
// three components per voxel.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "diffeo/error.hpp"

namespace diffeo {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double& operator[](int c) { return c == 0 ? x : (c == 1 ? y : z); }
    double operator[](int c) const { return c == 0 ? x : (c == 1 ? y : z); }

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

double norm(const Vec3& v);

class Grid3 {
public:
    Grid3() = default;
    Grid3(std::size_t nx, std::size_t ny, std::size_t nz, double sx = 1.0, double sy = 1.0,
          double sz = 1.0);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t nz() const { return nz_; }
    std::size_t dim(int axis) const { return axis == 0 ? nx_ : (axis == 1 ? ny_ : nz_); }
    double sx() const { return sx_; }
    double sy() const { return sy_; }
    double sz() const { return sz_; }
    double spacing(int axis) const { return axis == 0 ? sx_ : (axis == 1 ? sy_ : sz_); }

    std::size_t size() const { return nx_ * ny_ * nz_; }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return i + nx_ * (j + ny_ * k);
    }
    std::size_t stride(int axis) const { return axis == 0 ? 1 : (axis == 1 ? nx_ : nx_ * ny_); }

    // True when the voxel is on any face of the lattice.
    bool on_boundary(std::size_t i, std::size_t j, std::size_t k) const {
        return i == 0 || j == 0 || k == 0 || i + 1 == nx_ || j + 1 == ny_ || k + 1 == nz_;
    }

    // Same lattice dimensions; spacing compared to 1e-6 relative.
    bool same_lattice(const Grid3& other) const;
    bool operator==(const Grid3& other) const { return same_lattice(other); }

    std::string describe() const;

private:
    std::size_t nx_ = 2;
    std::size_t ny_ = 2;
    std::size_t nz_ = 2;
    double sx_ = 1.0;
    double sy_ = 1.0;
    double sz_ = 1.0;
};

enum class VolumeKind { intensity, jacobian, label };
enum class FieldKind { transformation, displacement, velocity, curl };

const char* to_string(VolumeKind kind);
const char* to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& name);

class ScalarVolume {
public:
    ScalarVolume() = default;
    explicit ScalarVolume(Grid3 grid, VolumeKind kind = VolumeKind::intensity, double fill = 0.0);
    ScalarVolume(Grid3 grid, std::vector<double> data, VolumeKind kind = VolumeKind::intensity);

    const Grid3& grid() const { return grid_; }
    VolumeKind kind() const { return kind_; }
    void set_kind(VolumeKind kind);

    std::size_t size() const { return data_.size(); }
    double& operator[](std::size_t idx) { return data_[idx]; }
    double operator[](std::size_t idx) const { return data_[idx]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) { return data_[grid_.index(i, j, k)]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[grid_.index(i, j, k)];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    // Throws InvalidArgument when a label volume holds a non-integer or negative value.
    void validate() const;

private:
    Grid3 grid_;
    VolumeKind kind_ = VolumeKind::intensity;
    std::vector<double> data_;
};

class VectorField {
public:
    VectorField() = default;
    explicit VectorField(Grid3 grid, FieldKind kind = FieldKind::displacement);
    VectorField(Grid3 grid, std::vector<double> data, FieldKind kind);

    const Grid3& grid() const { return grid_; }
    FieldKind kind() const { return kind_; }
    void set_kind(FieldKind kind) { kind_ = kind; }

    std::size_t voxels() const { return grid_.size(); }
    Vec3 get(std::size_t idx) const {
        return {data_[3 * idx], data_[3 * idx + 1], data_[3 * idx + 2]};
    }
    void set(std::size_t idx, const Vec3& v) {
        data_[3 * idx] = v.x;
        data_[3 * idx + 1] = v.y;
        data_[3 * idx + 2] = v.z;
    }
    double& comp(std::size_t idx, int c) { return data_[3 * idx + c]; }
    double comp(std::size_t idx, int c) const { return data_[3 * idx + c]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    // One component as a standalone volume.
    ScalarVolume component(int c, VolumeKind kind = VolumeKind::intensity) const;

private:
    Grid3 grid_;
    FieldKind kind_ = FieldKind::displacement;
    std::vector<double> data_;
};

struct FeatureStack {
    Grid3 grid;
    std::vector<ScalarVolume> channels;
    std::vector<std::string> channel_names;

    void add(std::string name, ScalarVolume channel);
    void validate() const;
};

void require_same_grid(const Grid3& a, const Grid3& b, const char* what);

Vec3 voxel_position(const Grid3& grid, std::size_t idx);

VectorField identity_field(const Grid3& grid);

// φ → φ − id. Displacements pass through unchanged.
VectorField to_displacement(const VectorField& field);
// u → id + u. Transformations pass through unchanged.
VectorField to_transformation(const VectorField& field);

// Trilinear interpolation at a continuous voxel-coordinate point. Points outside the
// lattice are clamped to the nearest face. Label volumes must use sample_nearest.
double sample_trilinear(const ScalarVolume& vol, const Vec3& p);
double sample_nearest(const ScalarVolume& vol, const Vec3& p);

// Trilinear sample of the displacement part of a field at p, clamped to the lattice.
Vec3 sample_displacement(const VectorField& field, const Vec3& p);

// output(p) = vol(φ(p)); nearest neighbour for label volumes.
ScalarVolume warp(const ScalarVolume& vol, const VectorField& phi);

// result(p) = outer(inner(p)).
VectorField compose(const VectorField& outer, const VectorField& inner);

// Largest voxel-wise Euclidean distance between two fields, optionally ignoring a
// margin of `margin` voxels at every face.
double max_difference(const VectorField& a, const VectorField& b, std::size_t margin = 0);

// Mean voxel-wise Euclidean magnitude of (φ − id).
double mean_displacement(const VectorField& phi);
double max_displacement(const VectorField& phi);

}  // namespace diffeo
