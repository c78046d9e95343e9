#pragma once

#include <string>
#include <vector>

#include "bifinf/error.hpp"
#include "bifinf/laurent.hpp"
#include "bifinf/parser.hpp"
#include "bifinf/sparse_poly.hpp"

namespace bifinf {

/// A polynomial map R^n -> R^p with n > p >= 1. The degree bound d is always
/// computed from the components, never taken from the caller.
class PolyMap {
public:
    PolyMap(std::vector<SparsePoly> components, std::vector<std::string> var_names)
        : components_(std::move(components)), names_(std::move(var_names)) {
        if (components_.empty()) throw ValidationError("map needs at least one component");
        n_ = names_.size();
        for (const auto& c : components_)
            if (c.nvars() != n_) throw ValidationError("component lives in the wrong number of variables");
        if (n_ <= components_.size())
            throw ValidationError("source dimension must exceed target dimension (n > p)");
        d_ = 0;
        for (const auto& c : components_) d_ = std::max(d_, c.total_degree());
        if (d_ < 1) throw ValidationError("map must have degree at least 1");
    }

    static PolyMap parse(const std::vector<std::string>& exprs, const std::vector<std::string>& vars) {
        std::vector<SparsePoly> comps;
        comps.reserve(exprs.size());
        for (const auto& e : exprs) comps.push_back(parse_poly(e, vars));
        return PolyMap(std::move(comps), vars);
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t p() const noexcept { return components_.size(); }
    int d() const noexcept { return d_; }

    const std::vector<SparsePoly>& components() const noexcept { return components_; }
    const SparsePoly& component(std::size_t i) const { return components_.at(i); }
    const std::vector<std::string>& var_names() const noexcept { return names_; }

    template <class T>
    std::vector<T> evaluate(std::span<const T> x) const {
        std::vector<T> v;
        v.reserve(p());
        for (const auto& c : components_) v.push_back(c.evaluate(x));
        return v;
    }

    template <class T>
    std::vector<T> evaluate(const std::vector<T>& x) const {
        return evaluate(std::span<const T>(x));
    }

    /// "f1 = ...; f2 = ..." in canonical form.
    std::string describe() const {
        std::string out;
        for (std::size_t i = 0; i < p(); ++i) {
            if (i) out += "; ";
            out += "f" + std::to_string(i + 1) + " = " + components_[i].to_string(names_);
        }
        return out;
    }

private:
    std::vector<SparsePoly> components_;
    std::vector<std::string> names_;
    std::size_t n_ = 0;
    int d_ = 0;
};

/// Componentwise f(x(t)).
template <class T>
std::vector<Laurent<T>> compose_arc(const PolyMap& f, const LaurentArc<T>& arc,
                                    std::optional<int> keep_from = std::nullopt) {
    if (arc.dim() != f.n()) throw ValidationError("arc dimension does not match map source dimension");
    std::vector<Laurent<T>> out;
    out.reserve(f.p());
    for (const auto& c : f.components()) out.push_back(compose(c, arc, keep_from));
    return out;
}

}  // namespace bifinf
