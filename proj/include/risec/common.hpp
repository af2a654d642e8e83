#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace risec {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLn2 = 0.69314718055994530942;

enum class ErrorKind {
    DegenerateGeometry,
    Dimension,
    Config,
    CapExceeded,
    Infeasible,
    Io,
    Version,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// splitmix64 finalizer, used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t child_seed(std::uint64_t parent, std::uint64_t stream, std::uint64_t index = 0) {
    return mix_seed(mix_seed(parent ^ mix_seed(stream + 1)) ^ (index * 0xD1B54A32D192ED03ULL));
}

using Rng = std::mt19937_64;

/// Circularly-symmetric complex Gaussian with unit variance (E|z|^2 = 1).
inline cd complex_gaussian(Rng& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline CMat complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    CMat m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complex_gaussian(rng);
    return m;
}

}  // namespace risec
