#pragma once

// Tape-based reverse-mode differentiation over dense matrices, with the
// segment primitives needed for message passing over edge arrays.
//
// Usage: build a Tape per training step, pull parameters in with
// Tape::param, compose ops, call Tape::backward on a 1x1 loss. Parameter
// gradients accumulate into ParamStore until adam_step (or zero_grad).

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "matrix.hpp"
#include "rng.hpp"

namespace dismantler::ad {

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Index = std::shared_ptr<const std::vector<std::uint32_t>>;

inline Index make_index(std::vector<std::uint32_t> ids) {
    return std::make_shared<const std::vector<std::uint32_t>>(std::move(ids));
}

struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix adam_m;
    Matrix adam_v;
};

enum class Init { GlorotUniform, Zeros, Constant };

/// Named parameters in registration order. The store owns the initializer
/// stream, so registration order plus seed fully determine initial values.
class ParamStore {
public:
    explicit ParamStore(std::uint64_t seed = 0) : seed_(seed), rng_(seed) {}

    // Parameters are referenced by address from tapes.
    ParamStore(const ParamStore &) = delete;
    ParamStore &operator=(const ParamStore &) = delete;
    ParamStore(ParamStore &&) = default;
    ParamStore &operator=(ParamStore &&) = default;

    Parameter &add(const std::string &name, std::size_t rows, std::size_t cols, Init init = Init::GlorotUniform,
                   double constant = 0.0) {
        if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
        auto p = std::make_unique<Parameter>();
        p->name = name;
        p->value = Matrix(rows, cols);
        if (init == Init::GlorotUniform) {
            const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
            for (auto &x : p->value.data()) x = rng_.uniform(-limit, limit);
        } else if (init == Init::Constant) {
            p->value.fill(constant);
        }
        p->grad = Matrix(rows, cols);
        p->adam_m = Matrix(rows, cols);
        p->adam_v = Matrix(rows, cols);
        index_[name] = params_.size();
        params_.push_back(std::move(p));
        return *params_.back();
    }

    Parameter &get(const std::string &name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
        return *params_[it->second];
    }
    const Parameter &get(const std::string &name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
        return *params_[it->second];
    }
    bool contains(const std::string &name) const { return index_.count(name) != 0; }

    std::size_t size() const { return params_.size(); }
    Parameter &operator[](std::size_t i) { return *params_[i]; }
    const Parameter &operator[](std::size_t i) const { return *params_[i]; }

    std::size_t num_scalars() const {
        std::size_t n = 0;
        for (const auto &p : params_) n += p->value.size();
        return n;
    }

    void zero_grad() {
        for (auto &p : params_) p->grad.fill(0.0);
    }

    std::uint64_t seed() const { return seed_; }
    std::size_t steps() const { return steps_; }
    std::size_t advance_step() { return ++steps_; }

private:
    std::uint64_t seed_;
    Rng rng_;
    std::vector<std::unique_ptr<Parameter>> params_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t steps_ = 0;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;
    Var(Tape *tape, std::size_t id) : tape_(tape), id_(id) {}

    const Matrix &value() const;
    const Matrix &grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    double item() const;

    Tape *tape() const { return tape_; }
    std::size_t id() const { return id_; }

private:
    Tape *tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    using BackwardFn = std::function<void(Tape &, std::size_t)>;

    Var constant(Matrix value) { return push(std::move(value), false, {}, "constant"); }

    /// A differentiable leaf not backed by a parameter (gradient checks).
    Var leaf(Matrix value) { return push(std::move(value), true, {}, "leaf"); }

    Var param(Parameter &p) {
        Var v = push(p.value, true, {}, p.name.c_str());
        nodes_[v.id()].param = &p;
        return v;
    }

    /// Records a computed node; the backward rule is dropped when no input
    /// needs a gradient.
    Var push(Matrix value, bool requires_grad, BackwardFn fn, const char *op) {
        if (!value.all_finite()) throw NumericError(std::string(op) + " produced non-finite values");
        Node n;
        n.value = std::move(value);
        n.requires_grad = requires_grad;
        if (requires_grad) n.backward = std::move(fn);
        nodes_.push_back(std::move(n));
        return {this, nodes_.size() - 1};
    }

    const Matrix &value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

    /// Empty until backward reaches the node.
    const Matrix &grad(std::size_t id) const { return nodes_[id].grad; }

    /// Gradient buffer of a node, allocated on first use.
    Matrix &grad_buffer(std::size_t id) {
        auto &n = nodes_[id];
        if (!n.grad.same_shape(n.value)) n.grad = Matrix(n.value.rows(), n.value.cols());
        return n.grad;
    }

    /// Propagates d(loss)/d(node) to every node and adds parameter gradients
    /// into their Parameter::grad.
    void backward(Var loss) {
        if (loss.tape() != this) throw std::invalid_argument("loss belongs to another tape");
        const auto &lv = nodes_[loss.id()].value;
        if (lv.rows() != 1 || lv.cols() != 1)
            throw ShapeError("backward needs a scalar loss, got " + lv.shape_string());
        for (auto &n : nodes_) n.grad = Matrix();
        grad_buffer(loss.id())(0, 0) = 1.0;
        for (std::size_t id = loss.id() + 1; id-- > 0;) {
            auto &n = nodes_[id];
            if (!n.requires_grad || n.grad.empty()) continue;
            if (n.backward) n.backward(*this, id);
            if (n.param) {
                auto &g = n.param->grad;
                for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += n.grad.data()[i];
            }
        }
    }

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        BackwardFn backward;
        Parameter *param = nullptr;
    };
    std::vector<Node> nodes_;
};

inline const Matrix &Var::value() const { return tape_->value(id_); }
inline const Matrix &Var::grad() const { return tape_->grad(id_); }
inline double Var::item() const {
    const auto &v = value();
    if (v.size() != 1) throw ShapeError("item() on non-scalar " + v.shape_string());
    return v(0, 0);
}

namespace detail {

inline Tape &same_tape(const Var &a, const Var &b) {
    if (a.tape() != b.tape() || a.tape() == nullptr) throw std::invalid_argument("vars from different tapes");
    return *a.tape();
}

inline void add_into(Matrix &dst, const Matrix &src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

// Elementwise unary op: y = f(x), dy/dx = df(x, y).
template <class F, class DF>
Var unary(const Var &x, F f, DF df, const char *name) {
    Tape &t = *x.tape();
    Matrix y(x.rows(), x.cols());
    const auto &xv = x.value();
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = f(xv.data()[i]);
    const auto xi = x.id();
    return t.push(std::move(y), t.requires_grad(xi),
                  [xi, df](Tape &tp, std::size_t self) {
                      const auto &xv = tp.value(xi);
                      const auto &yv = tp.value(self);
                      const Matrix &g = tp.grad_buffer(self);
                      auto &gx = tp.grad_buffer(xi);
                      for (std::size_t i = 0; i < gx.size(); ++i)
                          gx.data()[i] += g.data()[i] * df(xv.data()[i], yv.data()[i]);
                  },
                  name);
}

inline void check_index(const Index &idx, std::size_t bound, const char *op) {
    if (!idx) throw std::invalid_argument(std::string(op) + ": null index");
    for (auto i : *idx)
        if (i >= bound) throw std::out_of_range(std::string(op) + ": index out of range");
}

} // namespace detail

inline Var matmul(const Var &a, const Var &b) {
    Tape &t = detail::same_tape(a, b);
    Matrix y = dismantler::matmul(a.value(), b.value());
    const auto ai = a.id(), bi = b.id();
    return t.push(std::move(y), t.requires_grad(ai) || t.requires_grad(bi),
                  [ai, bi](Tape &tp, std::size_t self) {
                      const Matrix &g = tp.grad_buffer(self);
                      if (tp.requires_grad(ai)) detail::add_into(tp.grad_buffer(ai), matmul_nt(g, tp.value(bi)));
                      if (tp.requires_grad(bi)) detail::add_into(tp.grad_buffer(bi), matmul_tn(tp.value(ai), g));
                  },
                  "matmul");
}

inline Var add(const Var &a, const Var &b) {
    Tape &t = detail::same_tape(a, b);
    if (!a.value().same_shape(b.value()))
        throw ShapeError("add " + a.value().shape_string() + " + " + b.value().shape_string());
    Matrix y = a.value();
    detail::add_into(y, b.value());
    const auto ai = a.id(), bi = b.id();
    return t.push(std::move(y), t.requires_grad(ai) || t.requires_grad(bi),
                  [ai, bi](Tape &tp, std::size_t self) {
                      const Matrix &g = tp.grad_buffer(self);
                      if (tp.requires_grad(ai)) detail::add_into(tp.grad_buffer(ai), g);
                      if (tp.requires_grad(bi)) detail::add_into(tp.grad_buffer(bi), g);
                  },
                  "add");
}

/// Elementwise product of equally shaped matrices.
inline Var mul(const Var &a, const Var &b) {
    Tape &t = detail::same_tape(a, b);
    if (!a.value().same_shape(b.value()))
        throw ShapeError("mul " + a.value().shape_string() + " * " + b.value().shape_string());
    Matrix y = a.value();
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= b.value().data()[i];
    const auto ai = a.id(), bi = b.id();
    return t.push(std::move(y), t.requires_grad(ai) || t.requires_grad(bi),
                  [ai, bi](Tape &tp, std::size_t self) {
                      const Matrix &g = tp.grad_buffer(self);
                      const auto &av = tp.value(ai);
                      const auto &bv = tp.value(bi);
                      if (tp.requires_grad(ai)) {
                          auto &ga = tp.grad_buffer(ai);
                          for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * bv.data()[i];
                      }
                      if (tp.requires_grad(bi)) {
                          auto &gb = tp.grad_buffer(bi);
                          for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i] * av.data()[i];
                      }
                  },
                  "mul");
}

/// Scales every row of x (n x c) by the matching entry of w (n x 1).
inline Var mul_col(const Var &x, const Var &w) {
    Tape &t = detail::same_tape(x, w);
    const auto &xv = x.value();
    const auto &wv = w.value();
    if (wv.cols() != 1 || wv.rows() != xv.rows())
        throw ShapeError("mul_col " + xv.shape_string() + " by " + wv.shape_string());
    Matrix y = xv;
    for (std::size_t r = 0; r < y.rows(); ++r)
        for (auto &v : y.row(r)) v *= wv(r, 0);
    const auto xi = x.id(), wi = w.id();
    return t.push(std::move(y), t.requires_grad(xi) || t.requires_grad(wi),
                  [xi, wi](Tape &tp, std::size_t self) {
                      const Matrix &g = tp.grad_buffer(self);
                      const auto &xv = tp.value(xi);
                      const auto &wv = tp.value(wi);
                      if (tp.requires_grad(xi)) {
                          auto &gx = tp.grad_buffer(xi);
                          for (std::size_t r = 0; r < g.rows(); ++r)
                              for (std::size_t c = 0; c < g.cols(); ++c) gx(r, c) += g(r, c) * wv(r, 0);
                      }
                      if (tp.requires_grad(wi)) {
                          auto &gw = tp.grad_buffer(wi);
                          for (std::size_t r = 0; r < g.rows(); ++r) {
                              double acc = 0.0;
                              for (std::size_t c = 0; c < g.cols(); ++c) acc += g(r, c) * xv(r, c);
                              gw(r, 0) += acc;
                          }
                      }
                  },
                  "mul_col");
}

/// x (n x c) plus a broadcast row bias b (1 x c).
inline Var add_bias(const Var &x, const Var &b) {
    Tape &t = detail::same_tape(x, b);
    const auto &xv = x.value();
    const auto &bv = b.value();
    if (bv.rows() != 1 || bv.cols() != xv.cols())
        throw ShapeError("add_bias " + xv.shape_string() + " + " + bv.shape_string());
    Matrix y = xv;
    for (std::size_t r = 0; r < y.rows(); ++r) {
        auto row = y.row(r);
        for (std::size_t c = 0; c < y.cols(); ++c) row[c] += bv(0, c);
    }
    const auto xi = x.id(), bi = b.id();
    return t.push(std::move(y), t.requires_grad(xi) || t.requires_grad(bi),
                  [xi, bi](Tape &tp, std::size_t self) {
                      const Matrix &g = tp.grad_buffer(self);
                      if (tp.requires_grad(xi)) detail::add_into(tp.grad_buffer(xi), g);
                      if (tp.requires_grad(bi)) {
                          auto &gb = tp.grad_buffer(bi);
                          for (std::size_t r = 0; r < g.rows(); ++r)
                              for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
                      }
                  },
                  "add_bias");
}

inline Var scale(const Var &x, double k) {
    return detail::unary(x, [k](double v) { return k * v; }, [k](double, double) { return k; }, "scale");
}

inline Var relu(const Var &x) {
    return detail::unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
                         [](double v, double) { return v > 0.0 ? 1.0 : 0.0; }, "relu");
}

inline Var leaky_relu(const Var &x, double slope) {
    return detail::unary(x, [slope](double v) { return v > 0.0 ? v : slope * v; },
                         [slope](double v, double) { return v > 0.0 ? 1.0 : slope; }, "leaky_relu");
}

inline Var sigmoid(const Var &x) {
    return detail::unary(x,
                         [](double v) {
                             return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
                         },
                         [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

/// x -> 1 / (1 + x)
inline Var reciprocal_1p(const Var &x) {
    return detail::unary(x, [](double v) { return 1.0 / (1.0 + v); }, [](double, double y) { return -y * y; },
                         "reciprocal_1p");
}

inline Var log(const Var &x) {
    return detail::unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; }, "log");
}

inline Var exp(const Var &x) {
    return detail::unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; }, "exp");
}

/// Sum of all entries as a 1x1 matrix.
inline Var reduce_sum(const Var &x) {
    Tape &t = *x.tape();
    double acc = 0.0;
    for (double v : x.value().data()) acc += v;
    const auto xi = x.id();
    return t.push(Matrix(1, 1, acc), t.requires_grad(xi),
                  [xi](Tape &tp, std::size_t self) {
                      const double g = tp.grad_buffer(self)(0, 0);
                      for (auto &v : tp.grad_buffer(xi).data()) v += g;
                  },
                  "reduce_sum");
}

/// y[e] = x[idx[e]] row-wise.
inline Var row_gather(const Var &x, const Index &idx) {
    Tape &t = *x.tape();
    const auto &xv = x.value();
    detail::check_index(idx, xv.rows(), "row_gather");
    Matrix y(idx->size(), xv.cols());
    for (std::size_t e = 0; e < idx->size(); ++e) {
        auto src = xv.row((*idx)[e]);
        std::copy(src.begin(), src.end(), y.row(e).begin());
    }
    const auto xi = x.id();
    return t.push(std::move(y), t.requires_grad(xi),
                  [xi, idx](Tape &tp, std::size_t self) {
                      const Matrix &g = tp.grad_buffer(self);
                      auto &gx = tp.grad_buffer(xi);
                      for (std::size_t e = 0; e < idx->size(); ++e) {
                          auto dst = gx.row((*idx)[e]);
                          auto src = g.row(e);
                          for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
                      }
                  },
                  "row_gather");
}

/// y[s] = sum of rows e with ids[e] == s; segments with no rows are zero.
inline Var segment_sum(const Var &x, const Index &ids, std::size_t num_segments) {
    Tape &t = *x.tape();
    const auto &xv = x.value();
    if (!ids || ids->size() != xv.rows()) throw ShapeError("segment_sum: one id per row required");
    detail::check_index(ids, num_segments, "segment_sum");
    Matrix y(num_segments, xv.cols());
    for (std::size_t e = 0; e < ids->size(); ++e) {
        auto dst = y.row((*ids)[e]);
        auto src = xv.row(e);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
    const auto xi = x.id();
    return t.push(std::move(y), t.requires_grad(xi),
                  [xi, ids](Tape &tp, std::size_t self) {
                      const Matrix &g = tp.grad_buffer(self);
                      auto &gx = tp.grad_buffer(xi);
                      for (std::size_t e = 0; e < ids->size(); ++e) {
                          auto src = g.row((*ids)[e]);
                          auto dst = gx.row(e);
                          for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
                      }
                  },
                  "segment_sum");
}

/// Softmax of a column vector (E x 1) taken separately within each segment.
inline Var segment_softmax(const Var &x, const Index &ids, std::size_t num_segments) {
    Tape &t = *x.tape();
    const auto &xv = x.value();
    if (xv.cols() != 1) throw ShapeError("segment_softmax expects a column vector, got " + xv.shape_string());
    if (!ids || ids->size() != xv.rows()) throw ShapeError("segment_softmax: one id per row required");
    detail::check_index(ids, num_segments, "segment_softmax");
    std::vector<double> mx(num_segments, -std::numeric_limits<double>::infinity());
    for (std::size_t e = 0; e < ids->size(); ++e) mx[(*ids)[e]] = std::max(mx[(*ids)[e]], xv(e, 0));
    std::vector<double> denom(num_segments, 0.0);
    Matrix y(xv.rows(), 1);
    for (std::size_t e = 0; e < ids->size(); ++e) {
        y(e, 0) = std::exp(xv(e, 0) - mx[(*ids)[e]]);
        denom[(*ids)[e]] += y(e, 0);
    }
    for (std::size_t e = 0; e < ids->size(); ++e) y(e, 0) /= denom[(*ids)[e]];
    const auto xi = x.id();
    return t.push(std::move(y), t.requires_grad(xi),
                  [xi, ids, num_segments](Tape &tp, std::size_t self) {
                      const Matrix &g = tp.grad_buffer(self);
                      const auto &yv = tp.value(self);
                      std::vector<double> dot(num_segments, 0.0);
                      for (std::size_t e = 0; e < ids->size(); ++e) dot[(*ids)[e]] += yv(e, 0) * g(e, 0);
                      auto &gx = tp.grad_buffer(xi);
                      for (std::size_t e = 0; e < ids->size(); ++e)
                          gx(e, 0) += yv(e, 0) * (g(e, 0) - dot[(*ids)[e]]);
                  },
                  "segment_softmax");
}

struct AdamOptions {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction, then zeroes every gradient.
inline void adam_step(ParamStore &store, const AdamOptions &opt = {}) {
    const auto t = static_cast<double>(store.advance_step());
    const double c1 = 1.0 - std::pow(opt.beta1, t);
    const double c2 = 1.0 - std::pow(opt.beta2, t);
    for (std::size_t k = 0; k < store.size(); ++k) {
        auto &p = store[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad.data()[i];
            double &m = p.adam_m.data()[i];
            double &v = p.adam_v.data()[i];
            m = opt.beta1 * m + (1.0 - opt.beta1) * g;
            v = opt.beta2 * v + (1.0 - opt.beta2) * g * g;
            p.value.data()[i] -= opt.lr * (m / c1) / (std::sqrt(v / c2) + opt.eps);
        }
    }
    store.zero_grad();
}

} // namespace dismantler::ad
