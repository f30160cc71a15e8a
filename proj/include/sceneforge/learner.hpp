#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sceneforge/corpus.hpp"
#include "sceneforge/features.hpp"

// L2-regularized binary logistic regression for the scene discrimination
// task, optimized with L-BFGS and a backtracking (Armijo) line search.
namespace sceneforge {

struct SparseExample {
  std::vector<std::uint32_t> active;  // sorted indices of features equal to 1
  bool label = false;
};

// Candidates of one discrimination group; exactly one has label == true.
using VectorizedGroup = std::vector<SparseExample>;

struct TrainConfig {
  double l2_strength = 1.0;
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int history = 10;

  void validate() const {
    if (!(l2_strength >= 0)) throw ValidationError("l2_strength must be non-negative");
    if (max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
    if (!(gradient_tolerance > 0)) throw ValidationError("gradient_tolerance must be positive");
  }
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double margin(const WeightVector& w, const SparseExample& x) {
  double z = w.bias;
  for (auto i : x.active) z += w.values[i];
  return z;
}

inline double predict(const WeightVector& w, const SparseExample& x) { return sigmoid(margin(w, x)); }

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // aligned with WeightVector::values
  double bias_gradient = 0.0;

  double inf_norm() const {
    double m = std::abs(bias_gradient);
    for (double g : gradient) m = std::max(m, std::abs(g));
    return m;
  }
};

namespace detail {

// Neumaier compensated sum, accumulated in index order.
inline double stable_sum(std::span<const double> xs) {
  double sum = 0.0, c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t per = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * per, hi = std::min(n, lo + per);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Negative log likelihood plus (l2/2)||w||^2; the bias is not regularized.
// Per-example terms may be computed on several threads, but every reduction
// runs in example order, so the result does not depend on the thread count.
inline LossGradient loss_and_gradient(const WeightVector& w, std::span<const SparseExample> examples,
                                      double l2_strength, unsigned threads = 1) {
  std::vector<double> losses(examples.size()), residuals(examples.size());
  detail::parallel_for(examples.size(), threads, [&](std::size_t i) {
    const double z = margin(w, examples[i]);
    // -log sigma(z) = softplus(-z); -log(1 - sigma(z)) = softplus(z)
    losses[i] = examples[i].label ? softplus(-z) : softplus(z);
    residuals[i] = sigmoid(z) - (examples[i].label ? 1.0 : 0.0);
  });

  LossGradient out;
  out.gradient.assign(w.values.size(), 0.0);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (auto k : examples[i].active) out.gradient[k] += residuals[i];
    out.bias_gradient += residuals[i];
  }
  std::vector<double> reg(w.values.size());
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    out.gradient[k] += l2_strength * w.values[k];
    reg[k] = w.values[k] * w.values[k];
  }
  out.loss = detail::stable_sum(losses) + 0.5 * l2_strength * detail::stable_sum(reg);
  return out;
}

struct TrainResult {
  WeightVector weights;
  int iterations = 0;
  double final_loss = 0.0;
  double gradient_norm = 0.0;  // infinity norm at the returned weights
  bool converged = false;
  std::vector<double> loss_history;  // loss after each accepted step, starting at the initial point
};

// L-BFGS from zero weights. Deterministic for fixed inputs.
inline TrainResult train(std::span<const SparseExample> examples, std::size_t dimension, const TrainConfig& config) {
  config.validate();
  if (examples.empty()) throw ValidationError("training set is empty");
  for (const auto& e : examples)
    for (auto i : e.active)
      if (i >= dimension) throw ValidationError("example feature index exceeds the vocabulary size");

  const std::size_t n = dimension + 1;  // last coordinate is the bias
  auto unpack = [&](const std::vector<double>& x) {
    WeightVector w;
    w.values.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(dimension));
    w.bias = x[dimension];
    return w;
  };
  auto evaluate = [&](const std::vector<double>& x, std::vector<double>& grad) {
    auto lg = loss_and_gradient(unpack(x), examples, config.l2_strength, config.threads);
    if (!std::isfinite(lg.loss)) throw RuntimeFailure("training produced a non-finite loss");
    grad = std::move(lg.gradient);
    grad.push_back(lg.bias_gradient);
    return lg.loss;
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  auto inf_norm = [](const std::vector<double>& g) {
    double m = 0.0;
    for (double v : g) m = std::max(m, std::abs(v));
    return m;
  };

  std::vector<double> x(n, 0.0), g;
  double f = evaluate(x, g);
  TrainResult result;
  result.loss_history.push_back(f);

  std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;  // (s, y) pairs
  int it = 0;
  while (it < config.max_iterations && inf_norm(g) >= config.gradient_tolerance) {
    // Two-loop recursion for the search direction d = -H g.
    std::vector<double> q = g;
    std::vector<double> alpha(memory.size());
    for (std::size_t m = memory.size(); m-- > 0;) {
      const auto& [s, y] = memory[m];
      alpha[m] = dot(s, q) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[m] * y[i];
    }
    double gamma = 1.0;
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      gamma = dot(s, y) / dot(y, y);
    } else {
      gamma = 1.0 / std::max(1.0, inf_norm(g));
    }
    for (auto& v : q) v *= gamma;
    for (std::size_t m = 0; m < memory.size(); ++m) {
      const auto& [s, y] = memory[m];
      const double beta = dot(y, q) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) q[i] += s[i] * (alpha[m] - beta);
    }
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = -q[i];
    double slope = dot(g, d);
    if (!(slope < 0)) {
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] / std::max(1.0, inf_norm(g));
      slope = dot(g, d);
    }

    // Backtracking line search with the Armijo condition.
    double step = 1.0;
    std::vector<double> x_new(n), g_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
      f_new = evaluate(x_new, g_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (memory.empty()) break;  // no descent even along the gradient: numerically converged
      memory.clear();
      continue;
    }

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    if (dot(s, y) > 1e-12 * dot(y, y)) {
      memory.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(memory.size()) > config.history) memory.pop_front();
    }
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    result.loss_history.push_back(f);
    ++it;
  }

  result.weights = unpack(x);
  result.iterations = it;
  result.final_loss = f;
  result.gradient_norm = inf_norm(g);
  result.converged = result.gradient_norm < config.gradient_tolerance;
  return result;
}

// Builds labeled sparse examples for discrimination groups. With an unfrozen
// vocabulary new features are admitted; a frozen one drops unknown keys.
inline std::vector<VectorizedGroup> vectorize_groups(const Corpus& corpus,
                                                     const std::vector<DiscriminationGroup>& groups,
                                                     FeatureVocab& vocab, bool frozen) {
  std::vector<VectorizedGroup> out;
  out.reserve(groups.size());
  std::vector<std::set<std::string>> ngram_cache(corpus.description_count());
  std::vector<bool> cached(corpus.description_count(), false);
  for (const auto& g : groups) {
    VectorizedGroup vg;
    for (const auto& ex : g.examples) {
      if (!cached[ex.description]) {
        ngram_cache[ex.description] = text_ngrams(corpus.descriptions()[ex.description].text);
        cached[ex.description] = true;
      }
      const auto keys = pair_features(ngram_cache[ex.description], corpus.scenes()[ex.scene]);
      vg.push_back({vectorize(keys, vocab, frozen), ex.label});
    }
    out.push_back(std::move(vg));
  }
  return out;
}

inline std::vector<SparseExample> flatten(const std::vector<VectorizedGroup>& groups) {
  std::vector<SparseExample> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

enum class FeatureMode { modelid_only, full };

inline std::string to_string(FeatureMode m) { return m == FeatureMode::full ? "full" : "modelid_only"; }

// Copy of the weights with every category-target feature set to zero.
inline WeightVector mask_category_features(const WeightVector& w, const FeatureVocab& vocab) {
  WeightVector out = w;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (vocab.key(i).type == TargetType::category) out.values[i] = 0.0;
  return out;
}

// Fraction of groups whose true candidate has strictly the highest
// probability. Ties count as errors.
inline double eval_discrimination(const WeightVector& w, const FeatureVocab& vocab,
                                  const std::vector<VectorizedGroup>& groups, FeatureMode mode) {
  if (groups.empty()) return 0.0;
  const WeightVector effective = mode == FeatureMode::full ? w : mask_category_features(w, vocab);
  std::size_t correct = 0;
  for (const auto& g : groups) {
    // Compare margins: the sigmoid is monotone but saturates to equal values.
    double truth = -std::numeric_limits<double>::infinity();
    double best_other = -std::numeric_limits<double>::infinity();
    for (const auto& ex : g) {
      const double z = margin(effective, ex);
      if (ex.label)
        truth = z;
      else
        best_other = std::max(best_other, z);
    }
    if (truth > best_other) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(groups.size());
}

}  // namespace sceneforge
