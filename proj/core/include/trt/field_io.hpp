#pragma once

#include <string>

#include "trt/acquisition.hpp"
#include "trt/grid.hpp"

namespace trt {

/// Binary field file, all scalars little-endian:
///   bytes 0..7   magic "TRTFLD01"
///   u32          version (1)
///   u32          tensor order m
///   u32 x3       nx, ny, nz
///   char[16]     component order tag ("sym-lex-d1d2"), NUL padded
///   f64 x3       voxel spacing
///   f64 x3       origin (center of voxel (0,0,0))
///   f64 array    nx*ny*nz*dim_sym(m) values, index = vox*C + c with
///                vox = ix + nx*(iy + ny*iz)
void write_field(const std::string& path, const SymTensorField& f);
SymTensorField read_field(const std::string& path);

/// Binary sinogram file, little-endian:
///   bytes 0..7   magic "TRTSIN01"
///   u32          version (1)
///   u32          tensor order m
///   u32 x3       n_t, n_theta1, n_theta2
///   f64 x5       t_begin, t_end, theta_margin, step, ray_extent
///   u32 + bytes  curve description string
///   f64 array    (m+1)*n_t*n_theta1*n_theta2 values, index
///                ((i*n_t + it)*n_theta1 + a)*n_theta2 + b
void write_sinogram(const std::string& path, const Sinogram& g);

struct SinogramFile {
    int m = 0;
    int n_t = 0, n_theta1 = 0, n_theta2 = 0;
    double t_begin = 0.0, t_end = 0.0, theta_margin = 0.0, step = 0.0, ray_extent = 0.0;
    std::string curve_description;
    std::vector<double> values;
};
SinogramFile read_sinogram(const std::string& path);

/// Attach a previously serialized sinogram to an acquisition geometry;
/// shape and parameters must match.
Sinogram sinogram_from_file(const SinogramFile& file, const AcquisitionGeometry& geom);

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples per the
/// format). Values are windowed linearly from [lo, hi] to [0, 65535].
void write_pgm16(const std::string& path, int width, int height, const std::vector<double>& values,
                 double lo, double hi);

} // namespace trt
