#pragma once

#include <Eigen/Core>
#include <memory>

#include "trt/symbol.hpp"
#include "trt/transform.hpp"

namespace trt {

/// Frequency multiplier evaluated per patch: the symbol is frozen at the
/// patch center, so one patch needs a single evaluator for all bins.
class PatchMultiplier {
  public:
    virtual ~PatchMultiplier() = default;
    /// Full symbol matrix at angular frequency xi (rad / length unit).
    virtual Eigen::MatrixXd eval(const Vec3& xi) const = 0;
};

class MultiplierField {
  public:
    virtual ~MultiplierField() = default;
    virtual int order() const = 0;
    virtual std::unique_ptr<PatchMultiplier> at(const Vec3& patch_center) const = 0;
};

/// b(x, xi) = |xi|^radial_power * M. Identity with radial_power = 0 is
/// the no-op multiplier; |xi| * Id is the sharpening half-Laplacian.
class ConstantMultiplier : public MultiplierField {
  public:
    ConstantMultiplier(Eigen::MatrixXd matrix, double radial_power, int m);
    int order() const override { return m_; }
    std::unique_ptr<PatchMultiplier> at(const Vec3& patch_center) const override;

  private:
    Eigen::MatrixXd matrix_;
    double radial_power_;
    int m_;
};

/// The leading parametrix symbol: b(x, xi) = calibration * |xi| *
/// taper(x, xi^) * pinv(A0(x, xi^)), tabulated per patch center on a
/// direction grid and interpolated bilinearly per frequency bin. The
/// degree +1 radial growth inverts the degree -1 homogeneity of the
/// normal operator symbol; the zero-frequency bin is set to zero.
class ParametrixMultiplier : public MultiplierField {
  public:
    ParametrixMultiplier(const SymbolEvaluator& evaluator, int table_n1, int table_n2,
                         double calibration = 1.0);
    int order() const override;
    std::unique_ptr<PatchMultiplier> at(const Vec3& patch_center) const override;

    double calibration() const { return calibration_; }

  private:
    const SymbolEvaluator* evaluator_;
    int n1_, n2_;
    double calibration_;
};

struct PatchConfig {
    /// Cubic patch edge in voxels; must be even and divide into the grid
    /// with hop = patch/2.
    int patch = 32;
    /// FFT size = pad_factor * patch (>= 1; 2 suppresses wrap-around).
    int pad_factor = 2;
};

struct ParametrixStats {
    int patches = 0;
    int zero_patches = 0; // patches whose multiplier vanished identically
};

/// Apply a spatially varying Fourier multiplier by frozen-symbol
/// patching: overlapping cubic patches with square-root Hann windows on
/// both analysis and synthesis (hop = patch/2, exact partition of unity),
/// FFT per tensor component, matrix multiply in component space per
/// frequency bin, inverse FFT and overlap-add.
SymTensorField apply_parametrix(const SymTensorField& g, const MultiplierField& multiplier,
                                const PatchConfig& patching = {}, ParametrixStats* stats = nullptr);

struct ReconOptions {
    SymbolOptions symbol;          // gauge Chart matches the measured data
    PatchConfig patching;
    int table_n1 = 64;
    int table_n2 = 128;
    double calibration = 1.0;
    BackprojectMode mode = BackprojectMode::Geometric;

    ReconOptions() { symbol.gauge = FrameGauge::Chart; }
};

struct ReconstructionResult {
    SymTensorField recon;
    BackprojectStats backprojection;
    ParametrixStats patching;
    double calibration_used = 1.0;
};

/// Forward -> backproject -> parametrix. The approximate inversion
/// recovers the visible singularities of f up to flowout artifacts and
/// smoothing.
ReconstructionResult reconstruct(const SymTensorField& f, const AcquisitionGeometry& geom,
                                 const ReconOptions& opts);

/// Least-squares scalar fit: argmin_c || c * recon - reference ||_L2 over
/// the ball. Absorbs the measure normalization of the backprojection
/// into a single reported constant.
double fit_calibration(const SymTensorField& reference, const SymTensorField& recon, const Ball& region);

} // namespace trt
