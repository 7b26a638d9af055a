#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bosonforge {

inline constexpr const char* kVersion = "0.1.0";

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Truncated oscillator Hilbert space holding Fock levels |0..dim-1>.
struct FockSpace {
    int dim;

    explicit FockSpace(int n) : dim(n) {
        if (n < 2) throw std::invalid_argument("FockSpace: dim must be >= 2");
    }
    int hybrid_dim() const { return 2 * dim; }
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct TruncationError : Error { using Error::Error; };
struct IntegratorError : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct SymmetryViolation : Error { using Error::Error; };
struct IllPosed : Error { using Error::Error; };
struct MissingShots : Error { using Error::Error; };
struct MissingPoint : Error { using Error::Error; };
struct FitDivergence : Error { using Error::Error; };
struct MissingParams : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };

// Non-fatal diagnostics (truncation warnings etc.). The optimizer legitimately
// probes near-edge states, so these never throw.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

/// Runs fn(i) for i in [0, n) on up to BOSONFORGE_THREADS workers (default:
/// hardware concurrency). Results must be written to caller-owned slots so the
/// outcome is independent of the schedule.
void parallel_for(int n, const std::function<void(int)>& fn);
int worker_count();

}  // namespace bosonforge
