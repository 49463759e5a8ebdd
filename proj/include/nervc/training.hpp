#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nervc/autograd.hpp"
#include "nervc/dataset.hpp"
#include "nervc/hypernet.hpp"
#include "nervc/metrics.hpp"
#include "nervc/nerv.hpp"
#include "nervc/parallel.hpp"
#include "nervc/rng.hpp"
#include "nervc/tensor.hpp"

namespace nervc {

struct TrainConfig {
    int64_t steps = 1000;
    int64_t batch = 1;
    double lr = 1e-4;
    uint64_t seed = 1;
    Degrade degradation = Degrade::none;
    int64_t eval_every = 100;

    void validate() const {
        require(steps >= 0, "train config: steps must be non-negative");
        require(batch >= 1, "train config: batch must be positive");
        require(lr > 0.0, "train config: learning rate must be positive");
        require(eval_every >= 1, "train config: eval interval must be positive");
    }
};

struct HistoryRow {
    int64_t step = 0;
    double loss = 0.0;
    double lr = 0.0;
    double psnr = 0.0;
};

struct EvalRow {
    int64_t step = 0;
    double psnr = 0.0;
};

template <typename S>
struct FitResult {
    NervWeights<S> weights;
    std::vector<HistoryRow> history;
    double psnr = 0.0;
    double first_grad_norm = 0.0;
};

namespace detail {

template <typename S>
double grad_norm_sq(const Tensor<S>& g) {
    double s = 0.0;
    for (int64_t i = 0; i < g.numel(); ++i) s += double(g.data()[i]) * double(g.data()[i]);
    return s;
}

inline bool record_step(int64_t step, int64_t every, int64_t total) {
    return step == 1 || step == total || step % every == 0;
}

}  // namespace detail

// Gradient-descent fit of a single decoder to one video. All frames form
// the batch each step; the returned weights are the snapshot with the best
// training quality.
template <typename S>
FitResult<S> fit_nerv(const NervConfig& cfg, const Tensor<S>& video, const TrainConfig& tc) {
    cfg.validate();
    tc.validate();
    int64_t side = cfg.output_size();
    require(video.rank() == 4 && video.dim(0) == cfg.frame_count && video.dim(1) == cfg.out_channels &&
                video.dim(2) == side && video.dim(3) == side,
            "fit: video shape " + shape_str(video.shape()) + " does not match the decoder output");
    Rng rng(tc.seed);
    NervWeights<S> w = init_nerv_weights<S>(cfg, rng);
    AdamW<S> opt(tc.lr);
    std::vector<int64_t> ts(static_cast<size_t>(cfg.frame_count));
    for (int64_t t = 0; t < cfg.frame_count; ++t) ts[static_cast<size_t>(t)] = t;

    FitResult<S> best;
    best.psnr = -1.0;
    for (int64_t step = 1; step <= tc.steps; ++step) {
        Tape<S> tape;
        std::vector<Value<S>> ks, bs;
        for (auto& k : w.kernels) ks.push_back(tape.leaf(k, true));
        for (auto& b : w.biases) bs.push_back(tape.leaf(b, true));
        Value<S> pred = nerv_forward_ad(tape, cfg, ks, bs, ts);
        Value<S> loss = ad::mse_loss(pred, tape.constant(video));
        double lv = double(loss.val().data()[0]);
        require(std::isfinite(lv), "fit diverged at step " + std::to_string(step));
        tape.backward(loss);
        double p = psnr(pred.val(), video);
        if (p > best.psnr) {
            best.psnr = p;
            best.weights = w;
        }
        std::vector<Tensor<S>*> params;
        std::vector<const Tensor<S>*> grads;
        std::vector<Tensor<S>> gstore;
        gstore.reserve(ks.size() + bs.size());
        for (auto& v : ks) gstore.push_back(v.grad());
        for (auto& v : bs) gstore.push_back(v.grad());
        for (auto& k : w.kernels) params.push_back(&k);
        for (auto& b : w.biases) params.push_back(&b);
        for (auto& g : gstore) grads.push_back(&g);
        if (step == 1) {
            double s = 0.0;
            for (auto& g : gstore) s += detail::grad_norm_sq(g);
            best.first_grad_norm = std::sqrt(s);
        }
        opt.lr() = lr_at(tc.lr, step, tc.steps);
        opt.step(params, grads);
        if (detail::record_step(step, tc.eval_every, tc.steps))
            best.history.push_back({step, lv, lr_at(tc.lr, step, tc.steps), p});
    }
    if (best.psnr < 0.0) {
        best.weights = w;
        best.psnr = 0.0;
    }
    return best;
}

template <typename S>
struct TrainResult {
    HypernetParams<S> params;
    std::vector<HistoryRow> history;
    std::vector<EvalRow> evals;
    double final_eval_psnr = 0.0;
    double first_grad_norm = 0.0;
};

// The parameter draw train_hypernet starts from, reproducible from the seed
// alone so baselines can use the identical initialization.
template <typename S>
HypernetParams<S> initial_params(const HypernetConfig& cfg, uint64_t seed) {
    Rng root(seed);
    Rng init_rng = root.fork(0);
    return init_params<S>(cfg, init_rng);
}

// Encode each input with frozen parameters, decode every frame, and score
// against the paired target.
template <typename S>
std::vector<double> evaluate_hypernet(const HypernetConfig& cfg, HypernetParams<S>& params,
                                      const std::vector<Tensor<S>>& inputs, const std::vector<Tensor<S>>& targets) {
    require(inputs.size() == targets.size(), "evaluate: input/target count mismatch");
    std::vector<double> out(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) {
        NervWeights<S> w = hypernet_encode(cfg, params, inputs[i]);
        Tensor<S> dec = decode_video(cfg.nerv, w);
        out[i] = psnr(dec, targets[i]);
    }
    return out;
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

// Encoder inputs for one dataset split: clean copies, or degraded copies
// drawn once up front so every epoch sees the same corruption.
template <typename S>
std::vector<Tensor<S>> encoder_inputs(const std::vector<const Tensor<S>*>& videos, Degrade mode, Rng rng) {
    std::vector<Tensor<S>> out;
    out.reserve(videos.size());
    for (size_t i = 0; i < videos.size(); ++i) {
        Rng vr = rng.fork(i);
        out.push_back(mode == Degrade::none ? *videos[i] : degrade(*videos[i], mode, vr));
    }
    return out;
}

// Shared-encoder training over the train split. Each step runs the batch
// videos through independent graphs against shared parameters, averages the
// gradients, and applies one optimizer step. Losses always target the clean
// video even when the encoder sees a degraded input.
template <typename S>
TrainResult<S> train_hypernet(const HypernetConfig& cfg, const ToyDataset<S>& data, const TrainConfig& tc) {
    cfg.validate();
    tc.validate();
    require(data.train_count >= 1, "train: empty train split");
    require(tc.batch <= data.train_count, "train: batch larger than the train split");
    const NervConfig& nc = cfg.nerv;
    for (const auto& v : data.videos)
        require(v.rank() == 4 && v.dim(0) == cfg.frames() && v.dim(1) == 3 && v.dim(2) == cfg.height &&
                    v.dim(3) == cfg.width,
                "train: video shape " + shape_str(v.shape()) + " does not match the configured geometry");

    Rng root(tc.seed);
    Rng init_rng = root.fork(0);
    Rng shuffle_rng = root.fork(1);
    Rng degrade_train_rng = root.fork(2);
    Rng degrade_test_rng = root.fork(3);
    Rng dropout_root = root.fork(4);

    TrainResult<S> res;
    res.params = init_params<S>(cfg, init_rng);

    std::vector<const Tensor<S>*> train_videos, test_videos;
    for (int64_t i = 0; i < data.train_count; ++i) train_videos.push_back(&data.train(i));
    for (int64_t i = 0; i < data.test_count(); ++i) test_videos.push_back(&data.test(i));
    std::vector<Tensor<S>> train_inputs = encoder_inputs<S>(train_videos, tc.degradation, degrade_train_rng);
    std::vector<Tensor<S>> test_inputs = encoder_inputs<S>(test_videos, tc.degradation, degrade_test_rng);
    std::vector<Tensor<S>> test_targets;
    for (auto* v : test_videos) test_targets.push_back(*v);

    AdamW<S> opt(tc.lr);
    std::vector<int64_t> ts(static_cast<size_t>(cfg.frames()));
    for (int64_t t = 0; t < cfg.frames(); ++t) ts[static_cast<size_t>(t)] = t;

    std::vector<int64_t> order(static_cast<size_t>(data.train_count));
    for (int64_t i = 0; i < data.train_count; ++i) order[static_cast<size_t>(i)] = i;
    int64_t cursor = data.train_count;  // forces a shuffle before the first batch

    size_t slot_count = 0;
    res.params.visit([&](const std::string&, Tensor<S>&) { ++slot_count; });

    for (int64_t step = 1; step <= tc.steps; ++step) {
        if (cursor + tc.batch > data.train_count) {
            for (int64_t i = data.train_count - 1; i > 0; --i) {
                int64_t j = shuffle_rng.uniform_int(0, i);
                std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
            }
            cursor = 0;
        }
        std::vector<int64_t> batch_ids(order.begin() + cursor, order.begin() + cursor + tc.batch);
        cursor += tc.batch;

        std::vector<std::vector<Tensor<S>>> video_grads(static_cast<size_t>(tc.batch));
        std::vector<double> video_loss(static_cast<size_t>(tc.batch), 0.0);
        std::vector<double> video_psnr(static_cast<size_t>(tc.batch), 0.0);
        Rng step_rng = dropout_root.fork(static_cast<uint64_t>(step));
        parallel_for(tc.batch, 1, [&](int64_t b0, int64_t b1) {
            for (int64_t bi = b0; bi < b1; ++bi) {
                int64_t vid = batch_ids[static_cast<size_t>(bi)];
                Tape<S> tape;
                HypernetValues<S> P = lift_params(tape, res.params, true);
                Rng drng = step_rng.fork(static_cast<uint64_t>(vid));
                EncodedWeights<S> ew =
                    hypernet_encode_ad(tape, cfg, P, train_inputs[static_cast<size_t>(vid)], true, drng);
                Value<S> pred = nerv_forward_ad(tape, nc, ew.kernels, ew.biases, ts);
                const Tensor<S>& target = *train_videos[static_cast<size_t>(vid)];
                Value<S> loss = ad::mse_loss(pred, tape.constant(target));
                video_loss[static_cast<size_t>(bi)] = double(loss.val().data()[0]);
                tape.backward(loss);
                video_psnr[static_cast<size_t>(bi)] = psnr(pred.val(), target);
                std::vector<Tensor<S>>& gs = video_grads[static_cast<size_t>(bi)];
                gs.reserve(slot_count);
                P.visit([&](const std::string&, Value<S>& v) {
                    gs.push_back(v.tape == nullptr ? Tensor<S>() : v.grad());
                });
            }
        });

        double mean_loss = 0.0;
        for (double l : video_loss) mean_loss += l;
        mean_loss /= double(tc.batch);
        require(std::isfinite(mean_loss), "training diverged at step " + std::to_string(step));

        std::vector<Tensor<S>> total(slot_count);
        for (int64_t bi = 0; bi < tc.batch; ++bi) {
            const auto& gs = video_grads[static_cast<size_t>(bi)];
            for (size_t j = 0; j < slot_count; ++j) {
                if (gs[j].numel() == 0) continue;
                if (total[j].numel() == 0) {
                    total[j] = gs[j];
                } else {
                    for (int64_t i = 0; i < total[j].numel(); ++i) total[j].data()[i] += gs[j].data()[i];
                }
            }
        }
        S inv_b = S(1.0 / double(tc.batch));
        for (auto& g : total)
            for (int64_t i = 0; i < g.numel(); ++i) g.data()[i] *= inv_b;

        if (step == 1) {
            double s = 0.0;
            for (auto& g : total) s += detail::grad_norm_sq(g);
            res.first_grad_norm = std::sqrt(s);
        }

        std::vector<Tensor<S>*> params;
        std::vector<const Tensor<S>*> grads;
        res.params.visit([&](const std::string&, Tensor<S>& t) { params.push_back(&t); });
        for (auto& g : total) grads.push_back(&g);
        opt.lr() = lr_at(tc.lr, step, tc.steps);
        opt.step(params, grads);

        if (detail::record_step(step, tc.eval_every, tc.steps)) {
            res.history.push_back({step, mean_loss, lr_at(tc.lr, step, tc.steps), mean_of(video_psnr)});
            if (!test_inputs.empty()) {
                double ep = mean_of(evaluate_hypernet(cfg, res.params, test_inputs, test_targets));
                res.evals.push_back({step, ep});
                res.final_eval_psnr = ep;
            }
        }
    }
    if (res.evals.empty() && !test_inputs.empty())
        res.final_eval_psnr = mean_of(evaluate_hypernet(cfg, res.params, test_inputs, test_targets));
    return res;
}

}  // namespace nervc
