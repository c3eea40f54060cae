#pragma once

#include <cstddef>
#include <vector>

#include "complab/factor_model.hpp"
#include "complab/path_engine.hpp"
#include "complab/pricer.hpp"
#include "complab/types.hpp"

namespace complab {

// Variance swap paying <log S>_T at `maturity`, valued through the log
// contract:
//   V_t = 2 e^{-r(T-t)} int_0^t dS~/S~  -  2 v_log(t, x)
// where v_log prices the payoff log(S~_T / S_0) and `accrued` is the
// discounted-stock return integral up to t.
double varswap_price(const FactorModel& model, const Pricer& log_contract, double maturity,
                     double t, const Vector& x, double accrued = 0.0);

struct VarSwapPaths {
    std::vector<double> terminal_value;  // V_T
    std::vector<double> realized_qv;     // sum (d log S)^2
    std::vector<double> relative_gap;    // |V_T - QV| / QV
    double band = 0.0;                   // 2 / sqrt(n_steps)
    std::size_t within_band = 0;
};

// V_T along each path, with the accrued leg discretized as the left-point
// sum of dS~/S~.
VarSwapPaths varswap_along_paths(const FactorModel& model, const Pricer& log_contract,
                                 const PathSet& paths);

// grad v_V = (2 e^{-r(T-t)} / v_1) grad v_1 - 2 grad v_log
Vector varswap_gradient(const Vector& stock_gradient, const Vector& log_contract_gradient,
                        double v1, double t, double maturity, double rate);

struct RankCheck {
    int rank_before = 0;
    int rank_after = 0;
    bool equal = false;
};

// Replaces the last row (log contract) of G by the variance-swap gradient and
// compares numerical ranks. Row 0 must be the stock gradient.
RankCheck varswap_rank_check(const Matrix& G, double v1, double t, double maturity, double rate,
                             double tolerance = 1e-8);

}  // namespace complab
