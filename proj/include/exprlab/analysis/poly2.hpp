#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace exprlab {

// Polynomial in two integer parameters k and c with real coefficients.
// Terms are keyed by (k-degree, c-degree); zero coefficients are never stored.
class Poly2 {
public:
    using Key = std::pair<unsigned, unsigned>;

    Poly2() = default;
    static Poly2 constant(double v);
    static Poly2 monomial(unsigned i, unsigned j, double coeff = 1.0);

    const std::map<Key, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    double constant_term() const;
    double coeff(unsigned i, unsigned j) const;
    bool contains(unsigned i, unsigned j) const { return terms_.count({i, j}) != 0; }

    // Every term with a positive c-degree also has a positive k-degree.
    bool is_good() const;
    // Sign of the polynomial over k, c >= 1 when all coefficients agree:
    // +1 (all >= 0), -1 (all <= 0), 0 otherwise.
    int coefficient_sign() const;
    unsigned k_degree() const;

    double eval(double k, double c) const;

    Poly2& operator+=(const Poly2& o);
    Poly2& add_scaled(const Poly2& o, double s);
    Poly2 operator+(const Poly2& o) const;
    Poly2 operator*(double s) const;
    // Multiplication by k^i c^j.
    Poly2 shifted(unsigned i, unsigned j) const;

    bool operator==(const Poly2& o) const { return terms_ == o.terms_; }

    std::string to_string() const;

private:
    void set(Key key, double v);

    std::map<Key, double> terms_;
};

nlohmann::json to_json(const Poly2& p);

// Finite set of polynomials with its goodness flag.
struct PolySet {
    std::vector<Poly2> polys;
    bool good = true;

    static PolySet from(std::vector<Poly2> polys);
    bool any_contains(unsigned i, unsigned j) const;
};

nlohmann::json to_json(const PolySet& s);

}  // namespace exprlab
