#include "trt/field_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace trt {

namespace {

constexpr char kFieldMagic[8] = {'T', 'R', 'T', 'F', 'L', 'D', '0', '1'};
constexpr char kSinoMagic[8] = {'T', 'R', 'T', 'S', 'I', 'N', '0', '1'};
constexpr char kComponentTag[16] = {'s', 'y', 'm', '-', 'l', 'e', 'x', '-', 'd', '1', 'd', '2', 0, 0, 0, 0};

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_f64(std::ostream& os, double d) {
    const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

void put_f64_array(std::ostream& os, const std::vector<double>& data) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size() * sizeof(double)));
    } else {
        for (double d : data) put_f64(os, d);
    }
}

void get_f64_array(std::istream& is, std::vector<double>& data) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size() * sizeof(double)));
    } else {
        for (double& d : data) d = get_f64(is);
    }
}

void check_finite(const std::vector<double>& data, const std::string& path) {
    for (double d : data)
        if (!std::isfinite(d)) throw IoError("file contains non-finite values: " + path);
}

} // namespace

void write_field(const std::string& path, const SymTensorField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(kFieldMagic, 8);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(f.order()));
    for (int a = 0; a < 3; ++a) put_u32(os, static_cast<std::uint32_t>(f.grid().n[a]));
    os.write(kComponentTag, 16);
    for (int a = 0; a < 3; ++a) put_f64(os, f.grid().spacing[a]);
    for (int a = 0; a < 3; ++a) put_f64(os, f.grid().origin[a]);
    put_f64_array(os, f.data());
    if (!os) throw IoError("write failed: " + path);
}

SymTensorField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kFieldMagic, 8) != 0) throw IoError("not a field file: " + path);
    const std::uint32_t version = get_u32(is);
    if (version != 1) throw IoError("unsupported field file version in " + path);
    const int m = static_cast<int>(get_u32(is));
    if (m > 16) throw IoError("implausible tensor order in " + path);
    Grid3 grid;
    for (int a = 0; a < 3; ++a) grid.n[a] = static_cast<int>(get_u32(is));
    char tag[16];
    is.read(tag, 16);
    if (std::memcmp(tag, kComponentTag, 12) != 0) throw IoError("unknown component order tag in " + path);
    for (int a = 0; a < 3; ++a) grid.spacing[a] = get_f64(is);
    for (int a = 0; a < 3; ++a) grid.origin[a] = get_f64(is);
    if (!is) throw IoError("truncated header: " + path);
    if (grid.voxel_count() <= 0 || grid.voxel_count() > (std::int64_t(1) << 34))
        throw IoError("implausible grid in " + path);
    SymTensorField f(grid, m);
    get_f64_array(is, f.data());
    if (!is) throw IoError("truncated data: " + path);
    check_finite(f.data(), path);
    return f;
}

void write_sinogram(const std::string& path, const Sinogram& g) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    const AcquisitionGeometry& geom = g.geometry();
    os.write(kSinoMagic, 8);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(g.order()));
    put_u32(os, static_cast<std::uint32_t>(geom.n_t));
    put_u32(os, static_cast<std::uint32_t>(geom.n_theta1));
    put_u32(os, static_cast<std::uint32_t>(geom.n_theta2));
    put_f64(os, geom.curve->t_begin());
    put_f64(os, geom.curve->t_end());
    put_f64(os, geom.theta_margin);
    put_f64(os, geom.step);
    put_f64(os, geom.ray_extent);
    const std::string desc = geom.curve->describe();
    put_u32(os, static_cast<std::uint32_t>(desc.size()));
    os.write(desc.data(), std::streamsize(desc.size()));
    put_f64_array(os, g.values());
    if (!os) throw IoError("write failed: " + path);
}

SinogramFile read_sinogram(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kSinoMagic, 8) != 0) throw IoError("not a sinogram file: " + path);
    if (get_u32(is) != 1) throw IoError("unsupported sinogram file version in " + path);
    SinogramFile f;
    f.m = static_cast<int>(get_u32(is));
    f.n_t = static_cast<int>(get_u32(is));
    f.n_theta1 = static_cast<int>(get_u32(is));
    f.n_theta2 = static_cast<int>(get_u32(is));
    f.t_begin = get_f64(is);
    f.t_end = get_f64(is);
    f.theta_margin = get_f64(is);
    f.step = get_f64(is);
    f.ray_extent = get_f64(is);
    const std::uint32_t len = get_u32(is);
    if (len > (1u << 20)) throw IoError("implausible curve description in " + path);
    f.curve_description.resize(len);
    is.read(f.curve_description.data(), len);
    if (!is) throw IoError("truncated header: " + path);
    const std::int64_t count = std::int64_t(f.m + 1) * f.n_t * f.n_theta1 * f.n_theta2;
    if (f.m < 0 || f.m > 16 || count <= 0 || count > (std::int64_t(1) << 34))
        throw IoError("implausible sinogram shape in " + path);
    f.values.resize(count);
    get_f64_array(is, f.values);
    if (!is) throw IoError("truncated data: " + path);
    check_finite(f.values, path);
    return f;
}

Sinogram sinogram_from_file(const SinogramFile& file, const AcquisitionGeometry& geom) {
    if (file.n_t != geom.n_t || file.n_theta1 != geom.n_theta1 || file.n_theta2 != geom.n_theta2 ||
        std::abs(file.theta_margin - geom.theta_margin) > 1e-12 ||
        std::abs(file.t_begin - geom.curve->t_begin()) > 1e-12 ||
        std::abs(file.t_end - geom.curve->t_end()) > 1e-12)
        throw IoError("sinogram file does not match the configured acquisition geometry");
    Sinogram g(geom, file.m);
    g.values() = file.values;
    return g;
}

void write_pgm16(const std::string& path, int width, int height, const std::vector<double>& values,
                 double lo, double hi) {
    if (static_cast<std::int64_t>(values.size()) != std::int64_t(width) * height)
        throw IoError("pgm: value count does not match dimensions");
    if (!(hi > lo)) hi = lo + 1.0;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "P5\n" << width << " " << height << "\n65535\n";
    std::vector<unsigned char> row(std::size_t(width) * 2);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double v = std::clamp((values[std::size_t(y) * width + x] - lo) / (hi - lo), 0.0, 1.0);
            const std::uint16_t q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
            row[std::size_t(x) * 2] = static_cast<unsigned char>(q >> 8); // MSB first
            row[std::size_t(x) * 2 + 1] = static_cast<unsigned char>(q & 0xff);
        }
        os.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
    }
    if (!os) throw IoError("write failed: " + path);
}

} // namespace trt
