#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hetnet {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double sqrt_pi = 1.772453850905516027298167483341145183;
inline constexpr double ln10 = 2.302585092994045684017991454684364208;

// Raised when the Meijer-G residue series fails its internal consistency
// check (overflow or catastrophic cancellation); callers fall back to the
// direct integral route.
struct numeric_instability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a truncated series has not converged at its term budget.
struct series_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when adaptive integration exhausts its subdivision budget above tol.
struct integration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Compensated (Kahan) accumulator.
class kahan_sum {
  public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline bool is_nonpositive_integer(double x) {
    return x <= 0.0 && x == std::floor(x);
}

}  // namespace hetnet
