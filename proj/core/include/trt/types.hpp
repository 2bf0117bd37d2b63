#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace trt {

using Vec3 = Eigen::Vector3d;

/// A point in phase space: base point x and a nonzero direction xi.
struct Covector {
    Vec3 x = Vec3::Zero();
    Vec3 xi = Vec3::UnitZ();
};

struct Ball {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;

    bool contains(const Vec3& p) const { return (p - center).norm() <= radius; }
};

/// Bad user input (config files, CLI arguments). CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem / serialization failures. CLI exit code 3.
class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical preconditions violated at runtime (singular symbol, pole
/// chart breakdown, Nyquist violation...). CLI exit code 4.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// splitmix64; used to derive independent per-sample streams so that
/// parallel sampling loops are reproducible for any thread count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic counter-based RNG: value i of stream `seed` does not
/// depend on how many values were drawn before it on other streams.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0xda942042e4dd58b5ULL) {}
    Rng(std::uint64_t seed, std::uint64_t stream) : Rng(seed + 0x632be59bd9b4e019ULL * (stream + 1)) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniformly distributed unit vector.
    Vec3 unit_vector() {
        const double z = uniform(-1.0, 1.0);
        const double phi = uniform(0.0, 2.0 * 3.14159265358979323846);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }

    /// Uniform point in a ball.
    Vec3 in_ball(const Ball& b) {
        const double u = uniform();
        return b.center + b.radius * std::cbrt(u) * unit_vector();
    }

  private:
    std::uint64_t state_;
};

} // namespace trt
