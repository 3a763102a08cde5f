#ifndef ERGOTRACK_SPECFUN_HPP
#define ERGOTRACK_SPECFUN_HPP

// Kummer confluent hypergeometric function 1F1 and the even solution of the
// Weber equation, restricted to real arguments with z >= 0.

namespace ergotrack::specfun {

struct KummerParams {
    double a_param;  // first series parameter
    double b_param;  // second series parameter; must not be 0, -1, -2, ...
    double z;        // evaluation point, z >= 0
};

// 1F1(a, b, z) = sum_k (a)_k / (b)_k * z^k / k!
// Taylor series with term-ratio stopping for z <= 50, leading-order large-z
// expansion beyond. Throws std::domain_error for invalid (a, b, z),
// std::overflow_error when the result exceeds double range.
double kummer_1f1(const KummerParams& p);

// d/dz 1F1(a, b, z) = (a/b) 1F1(a+1, b+1, z)
double kummer_1f1_dz(const KummerParams& p);

// d/da 1F1(a, b, z), series with harmonic-sum weights. Test oracle only.
double kummer_1f1_da(const KummerParams& p);

// Even solution of w'' - (x^2/4 + theta) w = 0:
//   w(x; theta) = exp(-x^2/4) * 1F1(theta/2 + 1/4, 1/2, x^2/2)
double weber_even(double x, double theta);

}  // namespace ergotrack::specfun

#endif
