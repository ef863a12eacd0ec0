#pragma once

#include <vector>

#include "tsa/sa_core.hpp"

namespace tsa {

// bound on |L_ij| under complete pivoting with alpha = (1 + sqrt 17) / 8
inline constexpr double kBunchAlpha = 0.6403882032022076;
inline constexpr double kEntryBound = 2.7807764064044154;

struct Block {
    int start = 0;
    int size = 1;
    double a = 0.0, b = 0.0, c = 0.0;  // [[a, b], [b, c]] or just a
};

struct FlopCounter {
    long long factorize = 0;
    long long update = 0;
    long long precondition = 0;
    long long solve = 0;
    long long total() const { return factorize + update + precondition + solve; }
    void reset() { *this = FlopCounter{}; }
};

// P A P^T = L B L^T with (P A P^T)_ij = A(perm[i], perm[j])
struct LBLFactors {
    std::vector<int> perm;
    Mat L;
    std::vector<Block> blocks;
    double max_abs_l = 1.0;

    int n() const { return static_cast<int>(perm.size()); }
    bool entry_bound_ok() const { return max_abs_l <= kEntryBound + 1e-6; }
    static LBLFactors identity(int p);
};

struct BlockEigen {
    Vec lambda;                // eigenvalues in block order
    std::vector<double> cs, sn;  // rotation per block (cos, sin); 1x1 blocks carry (1, 0)
};

struct Inertia {
    int pos = 0, neg = 0, zero = 0;
    bool operator==(const Inertia&) const = default;
};

struct UpdateOptions {
    bool enforce_entry_bound = false;
    double growth_limit = 1e8;
    double pivot_tol = 1e-13;
};

LBLFactors factorize(const Mat& A, FlopCounter* flops = nullptr);

LBLFactors rank_one_update(const LBLFactors& f, double sigma, const Vec& z, const UpdateOptions& opt = {},
                           FlopCounter* flops = nullptr);

// B <- t B
void scale_blocks(LBLFactors& f, double t);

BlockEigen block_eigen(const std::vector<Block>& blocks, int n);

Inertia inertia_of(const Vec& lambda, double rel_tol = 1e-12);
Inertia inertia_of(const LBLFactors& f);

// d solving (P^T L Q diag(lambda) Q^T L^T P) d = rhs, with lambda taken from `eig`
Vec solve(const LBLFactors& f, const BlockEigen& eig, const Vec& rhs, FlopCounter* flops = nullptr);

// L^{-1} (P z) and its transpose counterpart, used by callers forming products
Vec forward_permuted(const LBLFactors& f, const Vec& z, FlopCounter* flops = nullptr);

// A x via the factors in O(p^2)
Vec apply(const LBLFactors& f, const Vec& x, FlopCounter* flops = nullptr);

Mat block_matrix(const std::vector<Block>& blocks, int n);
Mat reconstruct(const LBLFactors& f);

}  // namespace tsa
