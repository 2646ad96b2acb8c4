#include "exprlab/analysis/poly2.hpp"

#include <cmath>
#include <sstream>

namespace exprlab {

Poly2 Poly2::constant(double v) {
    Poly2 p;
    p.set({0, 0}, v);
    return p;
}

Poly2 Poly2::monomial(unsigned i, unsigned j, double coeff) {
    Poly2 p;
    p.set({i, j}, coeff);
    return p;
}

void Poly2::set(Key key, double v) {
    if (v == 0.0)
        terms_.erase(key);
    else
        terms_[key] = v;
}

bool Poly2::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Key{0, 0});
}

double Poly2::constant_term() const { return coeff(0, 0); }

double Poly2::coeff(unsigned i, unsigned j) const {
    auto it = terms_.find({i, j});
    return it == terms_.end() ? 0.0 : it->second;
}

bool Poly2::is_good() const {
    for (const auto& [key, v] : terms_)
        if (key.second > 0 && key.first == 0) return false;
    return true;
}

int Poly2::coefficient_sign() const {
    bool pos = false, neg = false;
    for (const auto& [key, v] : terms_) (v > 0 ? pos : neg) = true;
    if (pos && neg) return 0;
    return neg ? -1 : 1;
}

unsigned Poly2::k_degree() const {
    unsigned d = 0;
    for (const auto& [key, v] : terms_) d = std::max(d, key.first);
    return d;
}

double Poly2::eval(double k, double c) const {
    double s = 0.0;
    for (const auto& [key, v] : terms_) s += v * std::pow(k, key.first) * std::pow(c, key.second);
    return s;
}

Poly2& Poly2::add_scaled(const Poly2& o, double s) {
    if (s == 0.0) return *this;
    for (const auto& [key, v] : o.terms_) set(key, coeff(key.first, key.second) + s * v);
    return *this;
}

Poly2& Poly2::operator+=(const Poly2& o) { return add_scaled(o, 1.0); }

Poly2 Poly2::operator+(const Poly2& o) const {
    Poly2 r = *this;
    r += o;
    return r;
}

Poly2 Poly2::operator*(double s) const {
    Poly2 r;
    r.add_scaled(*this, s);
    return r;
}

Poly2 Poly2::shifted(unsigned i, unsigned j) const {
    Poly2 r;
    for (const auto& [key, v] : terms_) r.terms_[{key.first + i, key.second + j}] = v;
    return r;
}

std::string Poly2::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(12);
    bool first = true;
    for (const auto& [key, v] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << v;
        if (key.first) os << "*k^" << key.first;
        if (key.second) os << "*c^" << key.second;
    }
    return os.str();
}

nlohmann::json to_json(const Poly2& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [key, v] : p.terms()) terms.push_back({{"k", key.first}, {"c", key.second}, {"coeff", v}});
    return terms;
}

PolySet PolySet::from(std::vector<Poly2> polys) {
    PolySet s;
    s.polys = std::move(polys);
    for (const auto& p : s.polys) s.good = s.good && p.is_good();
    return s;
}

bool PolySet::any_contains(unsigned i, unsigned j) const {
    for (const auto& p : polys)
        if (p.contains(i, j)) return true;
    return false;
}

nlohmann::json to_json(const PolySet& s) {
    nlohmann::json polys = nlohmann::json::array();
    for (const auto& p : s.polys) polys.push_back(to_json(p));
    return {{"good", s.good}, {"size", s.polys.size()}, {"polys", polys}};
}

}  // namespace exprlab
