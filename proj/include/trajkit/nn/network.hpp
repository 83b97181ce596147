#pragma once

#include <random>
#include <string>
#include <vector>

#include "trajkit/nn/layer.hpp"

namespace trajkit::nn {

/// A stack of layers whose parameters live in a shared ParamLayout. Several
/// networks may register into the same layout; each one only touches its own
/// slices, and gradients accumulate into an array aligned with the layout.
///
/// Recurrent layers start from a zero state and emit one output per step.
/// TCN blocks are two dilated causal convolutions (left zero padding of
/// (kernel_size - 1) * dilation) plus a residual path, 1x1-projected when the
/// widths differ. The gated block replaces the second convolution's
/// nonlinearity with tanh(conv_f) * sigmoid(conv_g).
template <typename Scalar>
class Network {
 public:
  using Mat = Matrix<Scalar>;
  using Vec = Vector<Scalar>;
  using Seq = Sequence<Scalar>;

  struct LayerCache {
    Seq input;
    std::vector<Seq> aux;
  };

  struct Cache {
    const Network* owner = nullptr;
    Index steps = 0;
    Index batch = 0;
    std::vector<LayerCache> layers;
  };

  Network() = default;

  Network(std::vector<LayerSpec> specs, ParamLayout& layout, const std::string& prefix)
      : specs_(std::move(specs)) {
    if (specs_.empty()) fail(ErrorKind::config, "network " + prefix + " has no layers");
    for (std::size_t l = 0; l < specs_.size(); ++l) {
      const LayerSpec& s = specs_[l];
      validate(s);
      if (l > 0 && s.input_size != specs_[l - 1].output_size) {
        fail(ErrorKind::config, prefix + ": layer " + std::to_string(l) + " expects width " +
                                    std::to_string(s.input_size) + " but receives " +
                                    std::to_string(specs_[l - 1].output_size));
      }
      const std::string base = prefix + "." + std::to_string(l) + "." + to_string(s.kind) + ".";
      const Index in = s.input_size, out = s.output_size, k = s.kernel_size;
      std::vector<Slice> sl;
      switch (s.kind) {
        case LayerKind::dense:
          sl.push_back(layout.add(base + "W", out, in));
          sl.push_back(layout.add(base + "b", out, 1));
          break;
        case LayerKind::rnn:
          sl.push_back(layout.add(base + "W", out, in));
          sl.push_back(layout.add(base + "U", out, out));
          sl.push_back(layout.add(base + "b", out, 1));
          break;
        case LayerKind::lstm:  // gate rows: input, forget, cell, output
          sl.push_back(layout.add(base + "W", 4 * out, in));
          sl.push_back(layout.add(base + "U", 4 * out, out));
          sl.push_back(layout.add(base + "b", 4 * out, 1));
          break;
        case LayerKind::gru:  // gate rows: update, reset, candidate
          sl.push_back(layout.add(base + "W", 3 * out, in));
          sl.push_back(layout.add(base + "U", 3 * out, out));
          sl.push_back(layout.add(base + "b", 3 * out, 1));
          break;
        case LayerKind::tcn_block:
        case LayerKind::gated_tcn_block:
          sl.push_back(layout.add(base + "conv1.W", out, in * k));
          sl.push_back(layout.add(base + "conv1.b", out, 1));
          sl.push_back(layout.add(base + "conv2.W", out, out * k));
          sl.push_back(layout.add(base + "conv2.b", out, 1));
          if (s.kind == LayerKind::gated_tcn_block) {
            sl.push_back(layout.add(base + "gate.W", out, out * k));
            sl.push_back(layout.add(base + "gate.b", out, 1));
          }
          if (in != out) {
            sl.push_back(layout.add(base + "proj.W", out, in));
            sl.push_back(layout.add(base + "proj.b", out, 1));
          }
          break;
      }
      slices_.push_back(std::move(sl));
    }
  }

  const std::vector<LayerSpec>& specs() const { return specs_; }
  Index input_size() const { return specs_.front().input_size; }
  Index output_size() const { return specs_.back().output_size; }
  const std::vector<Slice>& layer_slices(std::size_t l) const { return slices_[l]; }

  /// Weights uniform in +-1/sqrt(fan_in), biases zero, LSTM forget bias one.
  template <typename Rng>
  void initialize(Vec& params, Rng& rng) const {
    for (std::size_t l = 0; l < specs_.size(); ++l) {
      for (const Slice& s : slices_[l]) {
        auto m = view(params, s);
        if (s.cols == 1 && s.name.back() == 'b') {
          m.setZero();
          continue;
        }
        const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(s.cols));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Index j = 0; j < m.cols(); ++j)
          for (Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(dist(rng));
      }
      if (specs_[l].kind == LayerKind::lstm) {
        const Index h = specs_[l].output_size;
        view(params, slices_[l][2]).middleRows(h, h).setOnes();
      }
    }
  }

  Seq forward(const Vec& params, const Seq& x, Cache* cache = nullptr) const {
    check_input(params, x);
    if (cache) {
      cache->owner = this;
      cache->steps = static_cast<Index>(x.size());
      cache->batch = x.front().cols();
      cache->layers.assign(specs_.size(), {});
    }
    Seq h = x;
    for (std::size_t l = 0; l < specs_.size(); ++l) {
      LayerCache* lc = cache ? &cache->layers[l] : nullptr;
      if (lc) lc->input = h;
      h = forward_layer(l, params, h, lc);
    }
    return h;
  }

  /// Accumulates parameter gradients into `grad` and returns dL/dx.
  Seq backward(const Vec& params, const Cache& cache, const Seq& dy, Vec& grad) const {
    if (cache.owner != this || cache.layers.size() != specs_.size()) {
      fail(ErrorKind::invalid_input, "backward called with a cache from another network");
    }
    if (static_cast<Index>(dy.size()) != cache.steps) {
      fail(ErrorKind::invalid_input, "upstream gradient length does not match cached forward");
    }
    for (const auto& d : dy) {
      if (d.rows() != output_size() || d.cols() != cache.batch) {
        fail(ErrorKind::invalid_input, "upstream gradient shape does not match cached forward");
      }
    }
    if (grad.size() != params.size()) {
      fail(ErrorKind::invalid_input, "gradient array does not match parameter array");
    }
    Seq d = dy;
    for (std::size_t l = specs_.size(); l-- > 0;) {
      d = backward_layer(l, params, cache.layers[l], d, grad);
    }
    return d;
  }

 private:
  void check_input(const Vec& params, const Seq& x) const {
    if (slices_.empty()) fail(ErrorKind::config, "network is not configured");
    const Slice& last = slices_.back().back();
    if (params.size() < last.offset + last.size()) {
      fail(ErrorKind::config, "parameter array too small for network");
    }
    if (x.empty()) fail(ErrorKind::config, "empty input sequence");
    const Index batch = x.front().cols();
    for (const auto& xt : x) {
      if (xt.rows() != input_size() || xt.cols() != batch || batch < 1) {
        fail(ErrorKind::config, "input shape mismatch: expected width " +
                                    std::to_string(input_size()) + ", got " +
                                    std::to_string(xt.rows()));
      }
    }
  }

  static Mat zeros(Index rows, Index cols) { return Mat::Zero(rows, cols); }

  // y_t = b + sum_j W_j x_{t - (k-1-j) d}; W_j is column block j of W.
  static Seq conv_forward(const Eigen::Map<const Mat>& w, const Eigen::Map<const Mat>& b,
                          const Seq& x, Index k, Index d) {
    const Index in = x.front().rows();
    const Index steps = static_cast<Index>(x.size());
    Seq y(x.size());
    for (Index t = 0; t < steps; ++t) {
      Mat yt = b.col(0).replicate(1, x.front().cols());
      for (Index j = 0; j < k; ++j) {
        const Index src = t - (k - 1 - j) * d;
        if (src >= 0) yt.noalias() += w.middleCols(j * in, in) * x[src];
      }
      y[t] = std::move(yt);
    }
    return y;
  }

  static void conv_backward(const Eigen::Map<const Mat>& w, const Seq& x, const Seq& da, Index k,
                            Index d, Eigen::Map<Mat> dw, Eigen::Map<Mat> db, Seq& dx) {
    const Index in = x.front().rows();
    const Index steps = static_cast<Index>(x.size());
    for (Index t = 0; t < steps; ++t) {
      db.col(0) += da[t].rowwise().sum();
      for (Index j = 0; j < k; ++j) {
        const Index src = t - (k - 1 - j) * d;
        if (src < 0) continue;
        dw.middleCols(j * in, in).noalias() += da[t] * x[src].transpose();
        dx[src].noalias() += w.middleCols(j * in, in).transpose() * da[t];
      }
    }
  }

  static Seq zeros_like(const Seq& x) {
    Seq z(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) z[t] = zeros(x[t].rows(), x[t].cols());
    return z;
  }

  Seq forward_layer(std::size_t l, const Vec& params, const Seq& x, LayerCache* lc) const {
    const LayerSpec& s = specs_[l];
    const auto& sl = slices_[l];
    const Index steps = static_cast<Index>(x.size());
    const Index batch = x.front().cols();
    const Index h = s.output_size;
    Seq y(x.size());

    switch (s.kind) {
      case LayerKind::dense: {
        auto w = view(params, sl[0]);
        auto b = view(params, sl[1]);
        Seq z(x.size());
        for (Index t = 0; t < steps; ++t) {
          z[t] = (w * x[t]).colwise() + b.col(0);
          y[t] = activate(s.activation, z[t]);
        }
        if (lc) lc->aux = {std::move(z), y};
        return y;
      }
      case LayerKind::rnn: {
        auto w = view(params, sl[0]);
        auto u = view(params, sl[1]);
        auto b = view(params, sl[2]);
        Seq z(x.size());
        Mat prev = zeros(h, batch);
        for (Index t = 0; t < steps; ++t) {
          z[t] = (w * x[t] + u * prev).colwise() + b.col(0);
          y[t] = activate(s.activation, z[t]);
          prev = y[t];
        }
        if (lc) lc->aux = {std::move(z), y};
        return y;
      }
      case LayerKind::lstm: {
        auto w = view(params, sl[0]);
        auto u = view(params, sl[1]);
        auto b = view(params, sl[2]);
        Seq gates(x.size()), cell(x.size()), cell_tanh(x.size());
        Mat h_prev = zeros(h, batch), c_prev = zeros(h, batch);
        for (Index t = 0; t < steps; ++t) {
          Mat a = (w * x[t] + u * h_prev).colwise() + b.col(0);
          Mat g(4 * h, batch);
          g.topRows(2 * h) = sigmoid(a.topRows(2 * h));
          g.middleRows(2 * h, h) = a.middleRows(2 * h, h).array().tanh().matrix();
          g.bottomRows(h) = sigmoid(a.bottomRows(h));
          Mat c = g.middleRows(h, h).cwiseProduct(c_prev) +
                  g.topRows(h).cwiseProduct(g.middleRows(2 * h, h));
          Mat tc = c.array().tanh().matrix();
          y[t] = g.bottomRows(h).cwiseProduct(tc);
          h_prev = y[t];
          c_prev = c;
          gates[t] = std::move(g);
          cell[t] = std::move(c);
          cell_tanh[t] = std::move(tc);
        }
        if (lc) lc->aux = {std::move(gates), std::move(cell), std::move(cell_tanh), y};
        return y;
      }
      case LayerKind::gru: {
        auto w = view(params, sl[0]);
        auto u = view(params, sl[1]);
        auto b = view(params, sl[2]);
        Seq update(x.size()), reset(x.size()), cand(x.size());
        Mat prev = zeros(h, batch);
        for (Index t = 0; t < steps; ++t) {
          Mat ax = (w * x[t]).colwise() + b.col(0);
          Mat zr = sigmoid(ax.topRows(2 * h) + u.topRows(2 * h) * prev);
          Mat rh = zr.bottomRows(h).cwiseProduct(prev);
          Mat n = (ax.bottomRows(h) + u.bottomRows(h) * rh).array().tanh().matrix();
          const Mat z = zr.topRows(h);
          y[t] = z.cwiseProduct(prev) + (Mat::Ones(h, batch) - z).cwiseProduct(n);
          prev = y[t];
          update[t] = z;
          reset[t] = zr.bottomRows(h);
          cand[t] = std::move(n);
        }
        if (lc) lc->aux = {std::move(update), std::move(reset), std::move(cand), y};
        return y;
      }
      case LayerKind::tcn_block:
      case LayerKind::gated_tcn_block: {
        const bool gated = s.kind == LayerKind::gated_tcn_block;
        const Index k = s.kernel_size, d = s.dilation;
        Seq a1 = conv_forward(view(params, sl[0]), view(params, sl[1]), x, k, d);
        Seq h1(x.size());
        for (Index t = 0; t < steps; ++t) h1[t] = activate(s.activation, a1[t]);
        Seq a2 = conv_forward(view(params, sl[2]), view(params, sl[3]), h1, k, d);
        Seq h2(x.size()), branch_f(x.size()), branch_g(x.size());
        if (gated) {
          Seq ag = conv_forward(view(params, sl[4]), view(params, sl[5]), h1, k, d);
          for (Index t = 0; t < steps; ++t) {
            branch_f[t] = a2[t].array().tanh().matrix();
            branch_g[t] = sigmoid(ag[t]);
            h2[t] = branch_f[t].cwiseProduct(branch_g[t]);
          }
        } else {
          for (Index t = 0; t < steps; ++t) h2[t] = activate(s.activation, a2[t]);
        }
        const bool projected = s.input_size != s.output_size;
        const std::size_t p = gated ? 6 : 4;
        for (Index t = 0; t < steps; ++t) {
          if (projected) {
            y[t] = h2[t] + ((view(params, sl[p]) * x[t]).colwise() + view(params, sl[p + 1]).col(0));
          } else {
            y[t] = h2[t] + x[t];
          }
        }
        if (lc) {
          lc->aux = {std::move(a1), std::move(h1), std::move(a2), std::move(h2)};
          if (gated) {
            lc->aux.push_back(std::move(branch_f));
            lc->aux.push_back(std::move(branch_g));
          }
        }
        return y;
      }
    }
    return y;
  }

  Seq backward_layer(std::size_t l, const Vec& params, const LayerCache& lc, const Seq& dy,
                     Vec& grad) const {
    const LayerSpec& s = specs_[l];
    const auto& sl = slices_[l];
    const Seq& x = lc.input;
    const Index steps = static_cast<Index>(x.size());
    const Index batch = x.front().cols();
    const Index h = s.output_size;
    Seq dx = zeros_like(x);

    switch (s.kind) {
      case LayerKind::dense: {
        auto w = view(params, sl[0]);
        auto dw = view(grad, sl[0]);
        auto db = view(grad, sl[1]);
        for (Index t = 0; t < steps; ++t) {
          const Mat dz = dy[t].cwiseProduct(activation_grad(s.activation, lc.aux[0][t], lc.aux[1][t]));
          dw.noalias() += dz * x[t].transpose();
          db.col(0) += dz.rowwise().sum();
          dx[t].noalias() = w.transpose() * dz;
        }
        return dx;
      }
      case LayerKind::rnn: {
        auto w = view(params, sl[0]);
        auto u = view(params, sl[1]);
        auto dw = view(grad, sl[0]);
        auto du = view(grad, sl[1]);
        auto db = view(grad, sl[2]);
        const Seq& z = lc.aux[0];
        const Seq& out = lc.aux[1];
        Mat dh_next = zeros(h, batch);
        for (Index t = steps - 1; t >= 0; --t) {
          const Mat dh = dy[t] + dh_next;
          const Mat dz = dh.cwiseProduct(activation_grad(s.activation, z[t], out[t]));
          dw.noalias() += dz * x[t].transpose();
          if (t > 0) du.noalias() += dz * out[t - 1].transpose();
          db.col(0) += dz.rowwise().sum();
          dx[t].noalias() = w.transpose() * dz;
          dh_next.noalias() = u.transpose() * dz;
        }
        return dx;
      }
      case LayerKind::lstm: {
        auto w = view(params, sl[0]);
        auto u = view(params, sl[1]);
        auto dw = view(grad, sl[0]);
        auto du = view(grad, sl[1]);
        auto db = view(grad, sl[2]);
        const Seq& gates = lc.aux[0];
        const Seq& cell = lc.aux[1];
        const Seq& cell_tanh = lc.aux[2];
        const Seq& out = lc.aux[3];
        Mat dh_next = zeros(h, batch), dc_next = zeros(h, batch);
        Mat da(4 * h, batch);
        for (Index t = steps - 1; t >= 0; --t) {
          const auto i = gates[t].topRows(h).array();
          const auto f = gates[t].middleRows(h, h).array();
          const auto g = gates[t].middleRows(2 * h, h).array();
          const auto o = gates[t].bottomRows(h).array();
          const auto tc = cell_tanh[t].array();
          const Mat dh = dy[t] + dh_next;
          const Mat dc = (dh.array() * o * (1 - tc.square())).matrix() + dc_next;
          const Mat c_prev = t > 0 ? cell[t - 1] : zeros(h, batch);
          da.topRows(h) = (dc.array() * g * i * (1 - i)).matrix();
          da.middleRows(h, h) = (dc.array() * c_prev.array() * f * (1 - f)).matrix();
          da.middleRows(2 * h, h) = (dc.array() * i * (1 - g.square())).matrix();
          da.bottomRows(h) = (dh.array() * tc * o * (1 - o)).matrix();
          dc_next = (dc.array() * f).matrix();
          dw.noalias() += da * x[t].transpose();
          if (t > 0) du.noalias() += da * out[t - 1].transpose();
          db.col(0) += da.rowwise().sum();
          dx[t].noalias() = w.transpose() * da;
          dh_next.noalias() = u.transpose() * da;
        }
        return dx;
      }
      case LayerKind::gru: {
        auto w = view(params, sl[0]);
        auto u = view(params, sl[1]);
        auto dw = view(grad, sl[0]);
        auto du = view(grad, sl[1]);
        auto db = view(grad, sl[2]);
        const Seq& update = lc.aux[0];
        const Seq& reset = lc.aux[1];
        const Seq& cand = lc.aux[2];
        const Seq& out = lc.aux[3];
        Mat dh_next = zeros(h, batch);
        Mat da(3 * h, batch);
        for (Index t = steps - 1; t >= 0; --t) {
          const Mat prev = t > 0 ? out[t - 1] : zeros(h, batch);
          const auto z = update[t].array();
          const auto r = reset[t].array();
          const auto n = cand[t].array();
          const Mat dh = dy[t] + dh_next;
          da.bottomRows(h) = (dh.array() * (1 - z) * (1 - n.square())).matrix();
          const Mat d_rh = u.bottomRows(h).transpose() * da.bottomRows(h);
          da.topRows(h) = (dh.array() * (prev.array() - n) * z * (1 - z)).matrix();
          da.middleRows(h, h) = (d_rh.array() * prev.array() * r * (1 - r)).matrix();
          dw.noalias() += da * x[t].transpose();
          du.topRows(2 * h).noalias() += da.topRows(2 * h) * prev.transpose();
          du.bottomRows(h).noalias() += da.bottomRows(h) * (r * prev.array()).matrix().transpose();
          db.col(0) += da.rowwise().sum();
          dx[t].noalias() = w.transpose() * da;
          dh_next = (dh.array() * z + d_rh.array() * r).matrix();
          dh_next.noalias() += u.topRows(2 * h).transpose() * da.topRows(2 * h);
        }
        return dx;
      }
      case LayerKind::tcn_block:
      case LayerKind::gated_tcn_block: {
        const bool gated = s.kind == LayerKind::gated_tcn_block;
        const Index k = s.kernel_size, d = s.dilation;
        const Seq& a1 = lc.aux[0];
        const Seq& h1 = lc.aux[1];
        const Seq& a2 = lc.aux[2];
        const Seq& h2 = lc.aux[3];
        Seq dh1 = zeros_like(h1);
        if (gated) {
          const Seq& bf = lc.aux[4];
          const Seq& bg = lc.aux[5];
          Seq daf(x.size()), dag(x.size());
          for (Index t = 0; t < steps; ++t) {
            daf[t] = (dy[t].array() * bg[t].array() * (1 - bf[t].array().square())).matrix();
            dag[t] = (dy[t].array() * bf[t].array() * bg[t].array() * (1 - bg[t].array())).matrix();
          }
          conv_backward(view(params, sl[2]), h1, daf, k, d, view(grad, sl[2]), view(grad, sl[3]), dh1);
          conv_backward(view(params, sl[4]), h1, dag, k, d, view(grad, sl[4]), view(grad, sl[5]), dh1);
        } else {
          Seq da2(x.size());
          for (Index t = 0; t < steps; ++t) {
            da2[t] = dy[t].cwiseProduct(activation_grad(s.activation, a2[t], h2[t]));
          }
          conv_backward(view(params, sl[2]), h1, da2, k, d, view(grad, sl[2]), view(grad, sl[3]), dh1);
        }
        Seq da1(x.size());
        for (Index t = 0; t < steps; ++t) {
          da1[t] = dh1[t].cwiseProduct(activation_grad(s.activation, a1[t], h1[t]));
        }
        conv_backward(view(params, sl[0]), x, da1, k, d, view(grad, sl[0]), view(grad, sl[1]), dx);
        if (s.input_size != s.output_size) {
          const std::size_t p = gated ? 6 : 4;
          auto pw = view(params, sl[p]);
          auto dpw = view(grad, sl[p]);
          auto dpb = view(grad, sl[p + 1]);
          for (Index t = 0; t < steps; ++t) {
            dpw.noalias() += dy[t] * x[t].transpose();
            dpb.col(0) += dy[t].rowwise().sum();
            dx[t].noalias() += pw.transpose() * dy[t];
          }
        } else {
          for (Index t = 0; t < steps; ++t) dx[t] += dy[t];
        }
        return dx;
      }
    }
    return dx;
  }

  std::vector<LayerSpec> specs_;
  std::vector<std::vector<Slice>> slices_;
};

}  // namespace trajkit::nn
