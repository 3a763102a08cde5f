#ifndef ERGOTRACK_SIMKIT_HPP
#define ERGOTRACK_SIMKIT_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ergotrack/localsolve.hpp"

// Monte Carlo engine for controlled Brownian motion: Euler-Maruyama paths,
// empirical time-average costs and occupation measures, online generator
// constraint residuals.

namespace ergotrack::simkit {

// Seeded Gaussian stream: mt19937_64 uniforms through Box-Muller with a
// cached second draw. The algorithm is fixed so seeds reproduce bit-exact
// results across runs.
class GaussRng {
  public:
    explicit GaussRng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // (0, 1)
        return (double(eng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double r = std::sqrt(-2.0 * std::log(uniform()));
        double t = 2.0 * M_PI * uniform();
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct PathConfig {
    double dt = 1e-3;
    double horizon = 1e4;
    std::uint64_t seed = 20260823;
    int n_paths = 1;
    bool track_residuals = false;  // accumulate generator residuals (slower)
};

struct StrategySpec {
    enum class Kind {
        Null,
        OUFeedback,
        ReflectAt,
        ImpulseAt,
        CombinedImpulse,
        CombinedSingular,
    };
    Kind kind = Kind::Null;
    double theta = 0.0;                  // OUFeedback gain
    double U = 0.0;                      // reflection / combined threshold
    double trigger = 0.0, target = 0.0;  // ImpulseAt (magnitudes, symmetric)
    double xi_star = 0.0;                // CombinedImpulse jump size
    // feedback sampled on a uniform grid over [-U, U] (combined classes)
    std::vector<double> feedback_table;
};

// Strategy realizing the optimal policy of a local solution.
StrategySpec optimal_strategy(const LocalSolution& sol);
// Thresholds scaled by lambda, feedback law zoomed the same way.
StrategySpec distort_strategy(const StrategySpec& s, double lambda);

// Feedback value at x: table interpolation for the combined kinds, -theta x
// for OUFeedback, 0 otherwise.
double feedback_at(const StrategySpec& s, double x);

struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<double> mass;  // normalized, samples clamped into range

    double bin_width() const {
        return mass.empty() ? 0.0 : (hi - lo) / double(mass.size());
    }
};

struct JumpBin {
    double x_center;
    double mean_xi;
    double weight;  // count / (horizon * n_paths)
};

struct PathStats {
    std::uint64_t seed;
    double cost, deviation, regular, fixed, proportional;
    long long interventions;
};

struct SimulationResult {
    double avg_cost = 0.0;
    double cost_deviation = 0.0, cost_regular = 0.0;
    double cost_fixed = 0.0, cost_proportional = 0.0;
    std::vector<double> per_path_costs;
    std::vector<PathStats> per_path;
    Histogram x_hist;  // 128 bins over strategy support
    Histogram u_hist;  // 64 bins over the control range
    std::vector<JumpBin> empirical_rho;
    double rho_total_mass = 0.0;
    long long n_interventions = 0;
    // one per standard test function, mean over paths of
    // (1/S)(sum A f dt + sum B f); the pathwise identity telescopes this to
    // a boundary plus martingale term of Monte-Carlo size O(1/sqrt(S))
    std::vector<double> constraint_residuals;
    // raw per-path residual samples, path-major (kNumTestFns per path)
    std::vector<double> constraint_residual_samples;
    std::string rng_name = "mt19937_64/box-muller";
    std::uint64_t seed = 0;
};

SimulationResult simulate(const ModelParams& p, const StrategySpec& s,
                          const PathConfig& c);

// (cost of the class-optimal strategy, cost with lambda-distorted policy),
// run on disjoint seed streams.
std::pair<SimulationResult, SimulationResult> suboptimality_probe(
    const ModelParams& p, ControlClass cls, double lambda,
    const PathConfig& c);

// The five smooth test functions used for residual tracking, as
// (f, f', f'') triples; scale stretches their common width.
struct TestFunction {
    std::function<double(double)> f, fp, fpp;
};
std::vector<TestFunction> standard_test_functions(double scale);

// Standard-error of the per-path cost mean.
double cost_standard_error(const SimulationResult& r);

}  // namespace ergotrack::simkit

#endif
