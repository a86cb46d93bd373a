#include "mandera/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mandera/rng.hpp"

namespace mandera {

namespace {

// numerically stable log-sum-exp softmax pieces shared by both models
void softmax_inplace(std::vector<double>& logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

class SoftmaxModel final : public Model {
 public:
  SoftmaxModel(int d, int num_classes) : d_(d), k_(num_classes) {
    if (d < 1 || num_classes < 2)
      throw std::invalid_argument("softmax model: need d >= 1, K >= 2");
  }

  std::int64_t param_count() const override {
    return static_cast<std::int64_t>(d_) * k_ + k_;
  }
  std::string name() const override { return "softmax"; }

  // layout: W row-major (K x d), then bias (K)
  double loss_and_gradient(std::span<const double> params, const Dataset& data,
                           std::span<const std::int64_t> samples,
                           std::span<double> grad) const override {
    if (samples.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    const double* W = params.data();
    const double* b = params.data() + static_cast<std::size_t>(d_) * k_;
    double* gW = nullptr;
    double* gb = nullptr;
    if (!grad.empty()) {
      std::fill(grad.begin(), grad.end(), 0.0);
      gW = grad.data();
      gb = grad.data() + static_cast<std::size_t>(d_) * k_;
    }
    std::vector<double> logits(k_);
    double loss = 0;
    for (std::int64_t s : samples) {
      const double* x = data.X.data() + static_cast<std::size_t>(s) * d_;
      for (int c = 0; c < k_; ++c) {
        double z = b[c];
        const double* w = W + static_cast<std::size_t>(c) * d_;
        for (int j = 0; j < d_; ++j) z += w[j] * x[j];
        logits[c] = z;
      }
      softmax_inplace(logits);
      int y = data.y[s];
      loss += -std::log(std::max(logits[y], 1e-300));
      if (gW) {
        for (int c = 0; c < k_; ++c) {
          double delta = logits[c] - (c == y ? 1.0 : 0.0);
          double* gw = gW + static_cast<std::size_t>(c) * d_;
          for (int j = 0; j < d_; ++j) gw[j] += delta * x[j];
          gb[c] += delta;
        }
      }
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    if (!grad.empty())
      for (double& g : grad) g *= inv;
    return loss * inv;
  }

  std::vector<double> init_params(std::uint64_t) const override {
    return std::vector<double>(param_count(), 0.0);
  }

  int predict(std::span<const double> params, std::span<const double> x) const override {
    const double* W = params.data();
    const double* b = params.data() + static_cast<std::size_t>(d_) * k_;
    int best = 0;
    double best_z = -HUGE_VAL;
    for (int c = 0; c < k_; ++c) {
      double z = b[c];
      const double* w = W + static_cast<std::size_t>(c) * d_;
      for (int j = 0; j < d_; ++j) z += w[j] * x[j];
      if (z > best_z) {
        best_z = z;
        best = c;
      }
    }
    return best;
  }

 private:
  int d_, k_;
};

class MlpModel final : public Model {
 public:
  MlpModel(int d, int hidden, int num_classes) : d_(d), h_(hidden), k_(num_classes) {
    if (d < 1 || hidden < 1 || num_classes < 2)
      throw std::invalid_argument("mlp model: need d >= 1, hidden >= 1, K >= 2");
  }

  // layout: W1 (h x d), b1 (h), W2 (K x h), b2 (K)
  std::int64_t param_count() const override {
    return static_cast<std::int64_t>(h_) * d_ + h_ + static_cast<std::int64_t>(k_) * h_ + k_;
  }
  std::string name() const override { return "mlp"; }

  double loss_and_gradient(std::span<const double> params, const Dataset& data,
                           std::span<const std::int64_t> samples,
                           std::span<double> grad) const override {
    if (samples.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    const double* W1 = params.data();
    const double* b1 = W1 + static_cast<std::size_t>(h_) * d_;
    const double* W2 = b1 + h_;
    const double* b2 = W2 + static_cast<std::size_t>(k_) * h_;
    double *gW1 = nullptr, *gb1 = nullptr, *gW2 = nullptr, *gb2 = nullptr;
    if (!grad.empty()) {
      std::fill(grad.begin(), grad.end(), 0.0);
      gW1 = grad.data();
      gb1 = gW1 + static_cast<std::size_t>(h_) * d_;
      gW2 = gb1 + h_;
      gb2 = gW2 + static_cast<std::size_t>(k_) * h_;
    }
    std::vector<double> hidden(h_), act(h_), logits(k_), dact(h_);
    double loss = 0;
    for (std::int64_t s : samples) {
      const double* x = data.X.data() + static_cast<std::size_t>(s) * d_;
      for (int u = 0; u < h_; ++u) {
        double z = b1[u];
        const double* w = W1 + static_cast<std::size_t>(u) * d_;
        for (int j = 0; j < d_; ++j) z += w[j] * x[j];
        hidden[u] = z;
        act[u] = std::tanh(z);
      }
      for (int c = 0; c < k_; ++c) {
        double z = b2[c];
        const double* w = W2 + static_cast<std::size_t>(c) * h_;
        for (int u = 0; u < h_; ++u) z += w[u] * act[u];
        logits[c] = z;
      }
      softmax_inplace(logits);
      int y = data.y[s];
      loss += -std::log(std::max(logits[y], 1e-300));
      if (gW1) {
        std::fill(dact.begin(), dact.end(), 0.0);
        for (int c = 0; c < k_; ++c) {
          double delta = logits[c] - (c == y ? 1.0 : 0.0);
          double* gw = gW2 + static_cast<std::size_t>(c) * h_;
          const double* w = W2 + static_cast<std::size_t>(c) * h_;
          for (int u = 0; u < h_; ++u) {
            gw[u] += delta * act[u];
            dact[u] += delta * w[u];
          }
          gb2[c] += delta;
        }
        for (int u = 0; u < h_; ++u) {
          double dz = dact[u] * (1.0 - act[u] * act[u]);
          double* gw = gW1 + static_cast<std::size_t>(u) * d_;
          for (int j = 0; j < d_; ++j) gw[j] += dz * x[j];
          gb1[u] += dz;
        }
      }
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    if (!grad.empty())
      for (double& g : grad) g *= inv;
    return loss * inv;
  }

  std::vector<double> init_params(std::uint64_t seed) const override {
    // small random init; zero init would leave the hidden layer symmetric
    Rng rng(seed, {0x696e6974ull});
    std::vector<double> params(param_count());
    for (auto& v : params) v = 0.1 * rng.normal();
    return params;
  }

  int predict(std::span<const double> params, std::span<const double> x) const override {
    const double* W1 = params.data();
    const double* b1 = W1 + static_cast<std::size_t>(h_) * d_;
    const double* W2 = b1 + h_;
    const double* b2 = W2 + static_cast<std::size_t>(k_) * h_;
    std::vector<double> act(h_);
    for (int u = 0; u < h_; ++u) {
      double z = b1[u];
      const double* w = W1 + static_cast<std::size_t>(u) * d_;
      for (int j = 0; j < static_cast<int>(x.size()); ++j) z += w[j] * x[j];
      act[u] = std::tanh(z);
    }
    int best = 0;
    double best_z = -HUGE_VAL;
    for (int c = 0; c < k_; ++c) {
      double z = b2[c];
      const double* w = W2 + static_cast<std::size_t>(c) * h_;
      for (int u = 0; u < h_; ++u) z += w[u] * act[u];
      if (z > best_z) {
        best_z = z;
        best = c;
      }
    }
    return best;
  }

 private:
  int d_, h_, k_;
};

}  // namespace

double Model::accuracy(std::span<const double> params, const Dataset& data) const {
  if (data.rows == 0) throw std::invalid_argument("accuracy: empty dataset");
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < data.rows; ++i)
    if (predict(params, data.sample(i)) == data.y[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.rows);
}

std::unique_ptr<Model> make_softmax_model(int d, int num_classes) {
  return std::make_unique<SoftmaxModel>(d, num_classes);
}

std::unique_ptr<Model> make_mlp_model(int d, int hidden, int num_classes) {
  return std::make_unique<MlpModel>(d, hidden, num_classes);
}

std::vector<double> node_gradient(const Model& model, std::span<const double> params,
                                  const Dataset& data, std::span<const std::int64_t> samples) {
  std::vector<double> grad(model.param_count());
  model.loss_and_gradient(params, data, samples, grad);
  return grad;
}

}  // namespace mandera
