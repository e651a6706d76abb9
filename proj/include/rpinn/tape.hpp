#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rpinn {

// Reverse-mode scalar tape. Each node stores local partials with respect to
// at most two parents. One tape per evaluation; never shared across threads.
class Tape {
 public:
  struct Node {
    double p1, p2;
    int a1, a2;  // parent indices, -1 if unused
  };

  int add_leaf() {
    nodes_.push_back({0.0, 0.0, -1, -1});
    return static_cast<int>(nodes_.size()) - 1;
  }
  int add_unary(int a, double p) {
    nodes_.push_back({p, 0.0, a, -1});
    return static_cast<int>(nodes_.size()) - 1;
  }
  int add_binary(int a, int b, double pa, double pb) {
    nodes_.push_back({pa, pb, a, b});
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // adjoints of every node given d(result)/d(result) = 1
  std::vector<double> backward(int result) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    adj[result] = 1.0;
    for (int i = result; i >= 0; --i) {
      const double a = adj[i];
      if (a == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.a1 >= 0) adj[n.a1] += n.p1 * a;
      if (n.a2 >= 0) adj[n.a2] += n.p2 * a;
    }
    return adj;
  }

 private:
  std::vector<Node> nodes_;
};

// Reverse-mode variable. Constants carry index -1 and no tape.
class Rev {
 public:
  Rev() : tape_(nullptr), idx_(-1), v_(0.0) {}
  Rev(double v) : tape_(nullptr), idx_(-1), v_(v) {}  // NOLINT: implicit constant
  Rev(Tape* tape, int idx, double v) : tape_(tape), idx_(idx), v_(v) {}

  static Rev leaf(Tape& tape, double v) { return Rev(&tape, tape.add_leaf(), v); }

  double value() const { return v_; }
  int index() const { return idx_; }
  bool is_const() const { return idx_ < 0; }
  Tape* tape() const { return tape_; }

  friend Rev operator+(const Rev& a, const Rev& b) {
    return make_binary(a, b, a.v_ + b.v_, 1.0, 1.0);
  }
  friend Rev operator-(const Rev& a, const Rev& b) {
    return make_binary(a, b, a.v_ - b.v_, 1.0, -1.0);
  }
  friend Rev operator*(const Rev& a, const Rev& b) {
    return make_binary(a, b, a.v_ * b.v_, b.v_, a.v_);
  }
  friend Rev operator/(const Rev& a, const Rev& b) {
    if (b.v_ == 0.0) throw std::domain_error("division by zero (primitive '/')");
    const double q = a.v_ / b.v_;
    return make_binary(a, b, q, 1.0 / b.v_, -q / b.v_);
  }
  friend Rev operator-(const Rev& a) { return unary(a, -a.v_, -1.0); }
  Rev& operator+=(const Rev& o) { return *this = *this + o; }
  Rev& operator-=(const Rev& o) { return *this = *this - o; }
  Rev& operator*=(const Rev& o) { return *this = *this * o; }

  friend Rev tanh(const Rev& a) {
    const double t = std::tanh(a.v_);
    return unary(a, t, 1.0 - t * t);
  }
  friend Rev exp(const Rev& a) {
    const double e = std::exp(a.v_);
    return unary(a, e, e);
  }
  friend Rev sin(const Rev& a) { return unary(a, std::sin(a.v_), std::cos(a.v_)); }
  friend Rev cos(const Rev& a) { return unary(a, std::cos(a.v_), -std::sin(a.v_)); }
  friend Rev cosh(const Rev& a) { return unary(a, std::cosh(a.v_), std::sinh(a.v_)); }
  friend Rev pow(const Rev& a, int n) {
    if (n < 0 && a.v_ == 0.0)
      throw std::domain_error("division by zero (primitive 'pow')");
    const double f = std::pow(a.v_, n);
    const double d = n == 0 ? 0.0 : n * std::pow(a.v_, n - 1);
    return unary(a, f, d);
  }

 private:
  static Rev unary(const Rev& a, double v, double p) {
    if (a.is_const()) return Rev(v);
    return Rev(a.tape_, a.tape_->add_unary(a.idx_, p), v);
  }
  static Rev make_binary(const Rev& a, const Rev& b, double v, double pa, double pb) {
    Tape* t = a.tape_ ? a.tape_ : b.tape_;
    if (!t) return Rev(v);
    if (a.is_const()) return Rev(t, t->add_unary(b.idx_, pb), v);
    if (b.is_const()) return Rev(t, t->add_unary(a.idx_, pa), v);
    return Rev(t, t->add_binary(a.idx_, b.idx_, pa, pb), v);
  }

  Tape* tape_;
  int idx_;
  double v_;
};

inline double scalar_value(const Rev& x) { return x.value(); }

}  // namespace rpinn
