#include "diffeo/nifti_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace diffeo {

namespace {

// Byte offsets of the NIfTI-1 header fields used here.
namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t intent_code = 68;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t descrip = 148;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern_b = 256;
constexpr std::size_t qoffset_x = 268;
constexpr std::size_t srow_x = 280;
constexpr std::size_t intent_name = 328;
constexpr std::size_t magic = 344;
}  // namespace off

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kDataOffset = 352;

class HeaderReader {
public:
    HeaderReader(const std::uint8_t* bytes, bool swap) : bytes_(bytes), swap_(swap) {}

    template <class T>
    T get(std::size_t offset) const {
        std::array<std::uint8_t, sizeof(T)> raw;
        std::memcpy(raw.data(), bytes_ + offset, sizeof(T));
        if (swap_) std::reverse(raw.begin(), raw.end());
        T v;
        std::memcpy(&v, raw.data(), sizeof(T));
        return v;
    }

    std::string text(std::size_t offset, std::size_t len) const {
        const char* p = reinterpret_cast<const char*>(bytes_ + offset);
        return std::string(p, strnlen(p, len));
    }

private:
    const std::uint8_t* bytes_;
    bool swap_;
};

std::size_t datatype_size(int datatype) {
    switch (datatype) {
        case nifti_datatype::uint8: return 1;
        case nifti_datatype::int16: return 2;
        case nifti_datatype::int32: return 4;
        case nifti_datatype::float32: return 4;
        case nifti_datatype::float64: return 8;
        default: return 0;
    }
}

template <class T>
T load(const std::uint8_t* p, bool swap) {
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), p, sizeof(T));
    if (swap) std::reverse(raw.begin(), raw.end());
    T v;
    std::memcpy(&v, raw.data(), sizeof(T));
    return v;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw NiftiError(NiftiErrorCode::io, "cannot open " + path.string());
    std::vector<std::uint8_t> out;
    std::array<std::uint8_t, 1 << 16> chunk;
    while (true) {
        const int got = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()));
        if (got < 0) {
            gzclose(f);
            throw NiftiError(NiftiErrorCode::io, "read error in " + path.string());
        }
        if (got == 0) break;
        out.insert(out.end(), chunk.begin(), chunk.begin() + got);
    }
    gzclose(f);
    return out;
}

bool wants_gzip(const std::filesystem::path& path) {
    const std::string s = path.string();
    return s.size() >= 3 && s.compare(s.size() - 3, 3, ".gz") == 0;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    if (wants_gzip(path)) {
        gzFile f = gzopen(path.c_str(), "wb6");
        if (!f) throw NiftiError(NiftiErrorCode::io, "cannot create " + path.string());
        std::size_t done = 0;
        while (done < bytes.size()) {
            const unsigned n = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - done, 1u << 20));
            if (gzwrite(f, bytes.data() + done, n) != static_cast<int>(n)) {
                gzclose(f);
                throw NiftiError(NiftiErrorCode::io, "write error in " + path.string());
            }
            done += n;
        }
        if (gzclose(f) != Z_OK) throw NiftiError(NiftiErrorCode::io, "write error in " + path.string());
        return;
    }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw NiftiError(NiftiErrorCode::io, "cannot create " + path.string());
    const bool ok = std::fwrite(bytes.data(), 1, bytes.size(), f) == bytes.size();
    if (std::fclose(f) != 0 || !ok) throw NiftiError(NiftiErrorCode::io, "write error in " + path.string());
}

template <class T>
void store(std::vector<std::uint8_t>& buf, std::size_t offset, T v) {
    static_assert(std::endian::native == std::endian::little, "writer assumes a little-endian host");
    std::memcpy(buf.data() + offset, &v, sizeof(T));
}

void store_text(std::vector<std::uint8_t>& buf, std::size_t offset, std::size_t len,
                const std::string& s) {
    std::memcpy(buf.data() + offset, s.data(), std::min(len - 1, s.size()));
}

struct Payload {
    std::vector<std::size_t> dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    int datatype = nifti_datatype::float32;
    int intent_code = 0;
    std::string intent_name;
    const NiftiOrientation* orientation = nullptr;
};

template <class Source>
std::vector<std::uint8_t> encode(const Payload& p, std::size_t count, Source value) {
    const std::size_t bytes_per = datatype_size(p.datatype);
    std::vector<std::uint8_t> buf(kDataOffset + count * bytes_per, 0);
    store<std::int32_t>(buf, off::sizeof_hdr, static_cast<std::int32_t>(kHeaderSize));
    store<std::int16_t>(buf, off::dim, static_cast<std::int16_t>(p.dims.size()));
    for (std::size_t d = 0; d < 7; ++d) {
        const std::size_t n = d < p.dims.size() ? p.dims[d] : 1;
        if (n > static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max()))
            throw NiftiError(NiftiErrorCode::bad_dimensions, "dimension too large for NIfTI-1");
        store<std::int16_t>(buf, off::dim + 2 * (d + 1), static_cast<std::int16_t>(n));
    }
    store<std::int16_t>(buf, off::intent_code, static_cast<std::int16_t>(p.intent_code));
    store<std::int16_t>(buf, off::datatype, static_cast<std::int16_t>(p.datatype));
    store<std::int16_t>(buf, off::bitpix, static_cast<std::int16_t>(8 * bytes_per));
    const NiftiOrientation orient = p.orientation ? *p.orientation : NiftiOrientation{};
    store<float>(buf, off::pixdim, orient.qfac < 0.0f ? -1.0f : 1.0f);
    for (std::size_t d = 0; d < 7; ++d)
        store<float>(buf, off::pixdim + 4 * (d + 1), d < 3 ? static_cast<float>(p.spacing[d]) : 1.0f);
    store<float>(buf, off::vox_offset, static_cast<float>(kDataOffset));
    store<float>(buf, off::scl_slope, 1.0f);
    store<float>(buf, off::scl_inter, 0.0f);
    buf[off::xyzt_units] = 2;  // millimetres
    store_text(buf, off::descrip, 80, "diffeo");
    if (p.orientation) {
        store<std::int16_t>(buf, off::qform_code, static_cast<std::int16_t>(orient.qform_code));
        store<std::int16_t>(buf, off::sform_code, static_cast<std::int16_t>(orient.sform_code));
        for (int i = 0; i < 3; ++i) {
            store<float>(buf, off::quatern_b + 4 * i, orient.quatern[i]);
            store<float>(buf, off::qoffset_x + 4 * i, orient.qoffset[i]);
            for (int j = 0; j < 4; ++j) store<float>(buf, off::srow_x + 16 * i + 4 * j, orient.srow[i][j]);
        }
    } else {
        // Scanner-aligned axes scaled by the spacing, origin at voxel 0.
        store<std::int16_t>(buf, off::qform_code, 1);
        store<std::int16_t>(buf, off::sform_code, 1);
        for (int i = 0; i < 3; ++i)
            store<float>(buf, off::srow_x + 16 * i + 4 * i, static_cast<float>(p.spacing[i]));
    }
    store_text(buf, off::intent_name, 16, p.intent_name);
    std::memcpy(buf.data() + off::magic, "n+1\0", 4);

    std::uint8_t* out = buf.data() + kDataOffset;
    for (std::size_t i = 0; i < count; ++i) {
        const double v = value(i);
        switch (p.datatype) {
            case nifti_datatype::float32: {
                const float f = static_cast<float>(v);
                std::memcpy(out + 4 * i, &f, 4);
                break;
            }
            case nifti_datatype::float64: std::memcpy(out + 8 * i, &v, 8); break;
            case nifti_datatype::int32: {
                const auto n = static_cast<std::int32_t>(std::llround(v));
                std::memcpy(out + 4 * i, &n, 4);
                break;
            }
            default: throw NiftiError(NiftiErrorCode::unsupported_datatype, "unsupported output datatype");
        }
    }
    return buf;
}

Grid3 grid_from(const NiftiHeaderView& h) {
    auto spacing = [](double s) { return s > 0.0 && std::isfinite(s) ? s : 1.0; };
    try {
        return Grid3(h.dims[0], h.dims[1], h.dims[2], spacing(h.spacing[0]), spacing(h.spacing[1]),
                     spacing(h.spacing[2]));
    } catch (const InvalidArgument& e) {
        throw NiftiError(NiftiErrorCode::bad_dimensions, e.what());
    }
}

std::size_t trailing_product(const std::vector<std::size_t>& dims, std::size_t from) {
    std::size_t n = 1;
    for (std::size_t d = from; d < dims.size(); ++d) n *= dims[d];
    return n;
}

}  // namespace

NiftiImage parse_nifti(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kHeaderSize)
        throw NiftiError(NiftiErrorCode::truncated, "file shorter than a NIfTI-1 header");

    const HeaderReader native(bytes.data(), false);
    bool swap = false;
    const std::int16_t dim0 = native.get<std::int16_t>(off::dim);
    if (dim0 < 1 || dim0 > 7) {
        const std::int16_t swapped = HeaderReader(bytes.data(), true).get<std::int16_t>(off::dim);
        if (swapped < 1 || swapped > 7)
            throw NiftiError(NiftiErrorCode::bad_dimensions, "dim[0] out of range in either byte order");
        swap = true;
    }
    const HeaderReader h(bytes.data(), swap);

    if (h.get<std::int32_t>(off::sizeof_hdr) != static_cast<std::int32_t>(kHeaderSize))
        throw NiftiError(NiftiErrorCode::bad_header_size, "sizeof_hdr is not 348");
    if (std::memcmp(bytes.data() + off::magic, "n+1\0", 4) != 0) {
        if (std::memcmp(bytes.data() + off::magic, "ni1\0", 4) == 0)
            throw NiftiError(NiftiErrorCode::bad_magic, "two-file NIfTI (.hdr/.img) is not supported");
        throw NiftiError(NiftiErrorCode::bad_magic, "not a single-file NIfTI-1 image");
    }

    NiftiImage img;
    NiftiHeaderView& view = img.header;
    view.byte_swapped = swap;
    const int ndim = h.get<std::int16_t>(off::dim);
    std::size_t count = 1;
    for (int d = 1; d <= ndim; ++d) {
        const std::int16_t n = h.get<std::int16_t>(off::dim + 2 * d);
        if (n < 1) throw NiftiError(NiftiErrorCode::bad_dimensions, "non-positive dimension");
        view.dims.push_back(static_cast<std::size_t>(n));
        count *= static_cast<std::size_t>(n);  // at most 32767^7, checked against the file below
        if (count > bytes.size())
            throw NiftiError(NiftiErrorCode::truncated, "declared voxel count exceeds file size");
    }

    view.datatype = h.get<std::int16_t>(off::datatype);
    const std::size_t bytes_per = datatype_size(view.datatype);
    if (bytes_per == 0)
        throw NiftiError(NiftiErrorCode::unsupported_datatype,
                         "unsupported datatype code " + std::to_string(view.datatype));

    for (int d = 0; d < 3; ++d) view.spacing[d] = h.get<float>(off::pixdim + 4 * (d + 1));
    double slope = h.get<float>(off::scl_slope);
    double inter = h.get<float>(off::scl_inter);
    if (slope == 0.0 || !std::isfinite(slope)) slope = 1.0;
    if (!std::isfinite(inter)) inter = 0.0;
    view.scl_slope = slope;
    view.scl_inter = inter;
    view.intent_code = h.get<std::int16_t>(off::intent_code);
    view.intent_name = h.text(off::intent_name, 16);
    view.description = h.text(off::descrip, 80);

    NiftiOrientation& o = view.orientation;
    o.qfac = h.get<float>(off::pixdim) < 0.0f ? -1.0f : 1.0f;
    o.qform_code = h.get<std::int16_t>(off::qform_code);
    o.sform_code = h.get<std::int16_t>(off::sform_code);
    for (int i = 0; i < 3; ++i) {
        o.quatern[i] = h.get<float>(off::quatern_b + 4 * i);
        o.qoffset[i] = h.get<float>(off::qoffset_x + 4 * i);
        for (int j = 0; j < 4; ++j) o.srow[i][j] = h.get<float>(off::srow_x + 16 * i + 4 * j);
    }

    const float vox = h.get<float>(off::vox_offset);
    if (!(vox >= 0.0f) || vox > static_cast<float>(bytes.size()))
        throw NiftiError(NiftiErrorCode::truncated, "vox_offset lies beyond the end of the file");
    const std::size_t offset = std::max<std::size_t>(static_cast<std::size_t>(vox), kDataOffset);
    if (offset > bytes.size() || (bytes.size() - offset) / bytes_per < count)
        throw NiftiError(NiftiErrorCode::truncated, "voxel payload is truncated");

    img.values.resize(count);
    const std::uint8_t* data = bytes.data() + offset;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* p = data + i * bytes_per;
        double v = 0.0;
        switch (view.datatype) {
            case nifti_datatype::uint8: v = *p; break;
            case nifti_datatype::int16: v = load<std::int16_t>(p, swap); break;
            case nifti_datatype::int32: v = load<std::int32_t>(p, swap); break;
            case nifti_datatype::float32: v = load<float>(p, swap); break;
            case nifti_datatype::float64: v = load<double>(p, swap); break;
        }
        img.values[i] = slope * v + inter;
    }
    return img;
}

NiftiImage read_nifti(const std::filesystem::path& path) {
    try {
        return parse_nifti(read_file(path));
    } catch (const NiftiError& e) {
        throw NiftiError(e.code(), path.string() + ": " + e.what());
    }
}

ScalarVolume read_volume(const std::filesystem::path& path, NiftiHeaderView* header) {
    NiftiImage img = read_nifti(path);
    const auto& dims = img.header.dims;
    if (dims.size() < 3 || trailing_product(dims, 3) != 1)
        throw NiftiError(NiftiErrorCode::bad_dimensions, path.string() + ": expected a 3-D volume");
    const Grid3 grid = grid_from(img.header);
    VolumeKind kind = VolumeKind::intensity;
    if (img.header.intent_name == "label") kind = VolumeKind::label;
    if (img.header.intent_name == "jacobian") kind = VolumeKind::jacobian;
    if (header) *header = img.header;
    return ScalarVolume(grid, std::move(img.values), kind);
}

void write_volume(const ScalarVolume& vol, const std::filesystem::path& path, const WriteOptions& opts) {
    Payload p;
    const Grid3& g = vol.grid();
    p.dims = {g.nx(), g.ny(), g.nz()};
    p.spacing = {g.sx(), g.sy(), g.sz()};
    p.orientation = opts.orientation;
    if (vol.kind() == VolumeKind::label) {
        vol.validate();
        p.datatype = nifti_datatype::int32;
        p.intent_name = "label";
    } else {
        p.datatype = opts.float64 ? nifti_datatype::float64 : nifti_datatype::float32;
        if (vol.kind() == VolumeKind::jacobian) p.intent_name = "jacobian";
    }
    write_file(path, encode(p, vol.size(), [&](std::size_t i) { return vol[i]; }));
}

VectorField read_field(const std::filesystem::path& path, NiftiHeaderView* header) {
    NiftiImage img = read_nifti(path);
    const auto& dims = img.header.dims;
    if (dims.size() != 5 || dims[3] != 1)
        throw NiftiError(NiftiErrorCode::bad_dimensions,
                         path.string() + ": expected a vector field with dim (nx, ny, nz, 1, 3)");
    if (dims[4] != 3)
        throw NiftiError(NiftiErrorCode::wrong_component_count,
                         path.string() + ": vector field has " + std::to_string(dims[4]) +
                             " components, expected 3");
    const Grid3 grid = grid_from(img.header);
    FieldKind kind = FieldKind::displacement;
    try {
        if (!img.header.intent_name.empty()) kind = field_kind_from_string(img.header.intent_name);
    } catch (const InvalidArgument&) {
        kind = FieldKind::displacement;
    }
    const std::size_t n = grid.size();
    VectorField field(grid, kind);
    for (std::size_t idx = 0; idx < n; ++idx)
        for (int c = 0; c < 3; ++c) field.comp(idx, c) = img.values[c * n + idx];
    if (header) *header = img.header;
    return field;
}

void write_field(const VectorField& field, const std::filesystem::path& path, const WriteOptions& opts) {
    Payload p;
    const Grid3& g = field.grid();
    p.dims = {g.nx(), g.ny(), g.nz(), 1, 3};
    p.spacing = {g.sx(), g.sy(), g.sz()};
    p.datatype = opts.float64 ? nifti_datatype::float64 : nifti_datatype::float32;
    p.intent_code = kNiftiIntentVector;
    p.intent_name = to_string(field.kind());
    p.orientation = opts.orientation;
    const std::size_t n = g.size();
    // Component-major on disk: all x, then all y, then all z.
    write_file(path, encode(p, 3 * n, [&](std::size_t i) { return field.comp(i % n, static_cast<int>(i / n)); }));
}

void write_multichannel(const Grid3& grid, const std::vector<const ScalarVolume*>& channels,
                        const std::filesystem::path& path, const WriteOptions& opts) {
    if (channels.empty()) throw InvalidArgument("no channels to write");
    for (const auto* ch : channels) require_same_grid(grid, ch->grid(), "multichannel write");
    Payload p;
    p.dims = {grid.nx(), grid.ny(), grid.nz(), channels.size()};
    p.spacing = {grid.sx(), grid.sy(), grid.sz()};
    p.datatype = opts.float64 ? nifti_datatype::float64 : nifti_datatype::float32;
    p.orientation = opts.orientation;
    const std::size_t n = grid.size();
    write_file(path, encode(p, channels.size() * n, [&](std::size_t i) { return (*channels[i / n])[i % n]; }));
}

std::vector<ScalarVolume> read_multichannel(const std::filesystem::path& path) {
    NiftiImage img = read_nifti(path);
    const auto& dims = img.header.dims;
    if (dims.size() < 3 || dims.size() > 4)
        throw NiftiError(NiftiErrorCode::bad_dimensions, path.string() + ": expected a 3-D or 4-D volume");
    const Grid3 grid = grid_from(img.header);
    const std::size_t channels = dims.size() == 4 ? dims[3] : 1;
    const std::size_t n = grid.size();
    std::vector<ScalarVolume> out;
    for (std::size_t c = 0; c < channels; ++c)
        out.emplace_back(grid, std::vector<double>(img.values.begin() + c * n, img.values.begin() + (c + 1) * n));
    return out;
}

}  // namespace diffeo
