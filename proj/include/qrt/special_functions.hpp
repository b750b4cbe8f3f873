// special_functions.hpp: Dawson/erfi, erfc, complete elliptic K, Jacobi sn/cn/dn.
#pragma once

namespace qrt {

// Dawson integral F(x) = exp(-x^2) * int_0^x exp(t^2) dt. Finite for all x.
double dawson(double x);

// Imaginary error function. Throws NumericalError for |x| > 25.
double erfi(double x);

double erfc(double x);

// Complete elliptic integral of the first kind, modulus convention K(k).
double elliptic_K(double k);

struct JacobiSnCnDn {
    double sn;
    double cn;
    double dn;
};

// Jacobi elliptic functions for real u and modulus 0 <= k < 1.
JacobiSnCnDn jacobi_sn_cn_dn(double u, double k);

}  // namespace qrt
