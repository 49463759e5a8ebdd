// Command-line front end: dataset synthesis, per-video fitting, shared
// encoder training, encoding, batched decoding, benchmarks, and metrics.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nervc/nervc.hpp"

namespace fs = std::filesystem;
using namespace nervc;

namespace {

std::vector<std::string> g_outputs;

void track(const std::string& path) { g_outputs.push_back(path); }

void remove_outputs() {
    for (const auto& p : g_outputs) {
        std::error_code ec;
        fs::remove(p, ec);
    }
}

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

RunConfig load_run_config(const std::string& config_path, const std::vector<std::string>& sets) {
    RunConfig rc;
    if (!config_path.empty()) {
        std::vector<uint8_t> raw = read_file(config_path);
        rc.apply_text(std::string(raw.begin(), raw.end()));
    }
    for (const auto& s : sets) rc.apply_line(s);
    return rc;
}

// Load a clip directory. A manifest pins membership; without one the clips
// sort by name and the trailing quarter is held out.
ToyDataset<float> load_clips(const std::string& dir) {
    require(fs::is_directory(dir), "not a directory: " + dir);
    ToyDataset<float> ds;
    fs::path manifest = fs::path(dir) / "manifest.txt";
    if (fs::exists(manifest)) {
        std::vector<uint8_t> raw = read_file(manifest.string());
        std::string text(raw.begin(), raw.end());
        std::vector<std::string> train_files, test_files;
        size_t start = 0;
        while (start <= text.size()) {
            size_t nl = text.find('\n', start);
            std::string line = nl == std::string::npos ? text.substr(start) : text.substr(start, nl - start);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) {
                size_t sp = line.find(' ');
                require(sp != std::string::npos, "manifest: expected 'file label', got '" + line + "'");
                std::string file = line.substr(0, sp), label = line.substr(sp + 1);
                if (label == "train")
                    train_files.push_back(file);
                else if (label == "test")
                    test_files.push_back(file);
                else
                    fail("manifest: unknown split label '" + label + "'");
            }
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
        require(!train_files.empty(), "manifest: no train entries");
        for (const auto& f : train_files) ds.videos.push_back(read_nvrw<float>((fs::path(dir) / f).string()));
        for (const auto& f : test_files) ds.videos.push_back(read_nvrw<float>((fs::path(dir) / f).string()));
        ds.train_count = static_cast<int64_t>(train_files.size());
    } else {
        std::vector<std::string> paths;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".nvrw") paths.push_back(e.path().string());
        std::sort(paths.begin(), paths.end());
        require(!paths.empty(), "no .nvrw files in " + dir);
        for (const auto& p : paths) ds.videos.push_back(read_nvrw<float>(p));
        int64_t count = static_cast<int64_t>(ds.videos.size());
        ds.train_count = count - count / 4;
    }
    for (const auto& v : ds.videos)
        require(v.shape() == ds.videos[0].shape(), "clips disagree on geometry: " + shape_str(v.shape()) + " vs " +
                                                       shape_str(ds.videos[0].shape()));
    return ds;
}

int run(int argc, char** argv) {
    CLI::App app{"implicit-neural video codec"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "key=value options file");
    app.add_option("--set", sets, "inline option override (key=value)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic moving-rectangle dataset");
    int64_t sy_count = 64, sy_frames = 4, sy_size = 32;
    uint64_t sy_seed = 1;
    std::string sy_out = "data";
    synth->add_option("--count", sy_count, "number of clips")->capture_default_str();
    synth->add_option("--frames", sy_frames, "frames per clip")->capture_default_str();
    synth->add_option("--size", sy_size, "frame side length")->capture_default_str();
    synth->add_option("--seed", sy_seed, "dataset seed")->capture_default_str();
    synth->add_option("--out", sy_out, "output directory")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "fit one decoder to one video and store it");
    std::string ft_video, ft_out = "video.nrvp", ft_history;
    int64_t ft_steps = 0;
    int ft_bits = 6;
    fit->add_option("--video", ft_video, "input .nvrw video")->required();
    fit->add_option("--steps", ft_steps, "optimization steps (overrides config)");
    fit->add_option("--out", ft_out, "output .nrvp model")->capture_default_str();
    fit->add_option("--bits", ft_bits, "quantizer bit depth")->capture_default_str();
    fit->add_option("--history", ft_history, "training history CSV");

    auto* tre = app.add_subcommand("train-enc", "train the shared video-to-weights encoder");
    std::string te_data, te_out = "encoder.nvck", te_history, te_evals;
    int64_t te_epochs = 0, te_steps = 0;
    tre->add_option("--data", te_data, "directory of .nvrw clips")->required();
    tre->add_option("--out", te_out, "output checkpoint")->capture_default_str();
    tre->add_option("--epochs", te_epochs, "train for this many passes over the train split");
    tre->add_option("--steps", te_steps, "train for exactly this many steps (overrides --epochs)");
    tre->add_option("--history", te_history, "training history CSV");
    tre->add_option("--evals", te_evals, "held-out evaluation CSV");

    auto* enc = app.add_subcommand("encode", "encode a video with a trained encoder");
    std::string en_ckpt, en_video, en_out = "video.nrvp";
    int en_bits = 6;
    enc->add_option("--enc", en_ckpt, "encoder checkpoint")->required();
    enc->add_option("--video", en_video, "input .nvrw video")->required();
    enc->add_option("--out", en_out, "output .nrvp model")->capture_default_str();
    enc->add_option("--bits", en_bits, "quantizer bit depth")->capture_default_str();

    auto* dec = app.add_subcommand("decode", "decode stored models back to video");
    std::vector<std::string> de_models;
    std::string de_out = ".";
    bool de_ppm = false;
    int64_t de_group = 1;
    dec->add_option("--in", de_models, "input .nrvp models")->required();
    dec->add_option("--out", de_out, "output directory")->capture_default_str();
    dec->add_option("--group", de_group, "decode this many videos per grouped pass")->capture_default_str();
    dec->add_flag("--ppm", de_ppm, "emit per-frame P6 PPM files instead of NVRW");

    auto* ben = app.add_subcommand("bench", "measure grouped decoding throughput");
    std::string be_groups = "1,2,4,8,16";
    int64_t be_videos = 16, be_frames = 4;
    int be_threads = 0, be_reps = 3;
    ben->add_option("--groups", be_groups, "comma list of group sizes")->capture_default_str();
    ben->add_option("--videos", be_videos, "videos per measurement")->capture_default_str();
    ben->add_option("--frames", be_frames, "frames per video")->capture_default_str();
    ben->add_option("--threads", be_threads, "worker threads (0 = all)")->capture_default_str();
    ben->add_option("--reps", be_reps, "repetitions, best kept")->capture_default_str();

    auto* met = app.add_subcommand("metrics", "compare two videos");
    std::string me_ref, me_test;
    met->add_option("--ref", me_ref, "reference .nvrw")->required();
    met->add_option("--test", me_test, "test .nvrw")->required();

    auto* deg = app.add_subcommand("degrade", "apply a degradation to a video");
    std::string dg_video, dg_out, dg_mode = "downsample";
    uint64_t dg_seed = 1;
    deg->add_option("--video", dg_video, "input .nvrw video")->required();
    deg->add_option("--out", dg_out, "output .nvrw video")->required();
    deg->add_option("--mode", dg_mode, "downsample, blur, or mask")->capture_default_str();
    deg->add_option("--seed", dg_seed, "placement seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    RunConfig rc = load_run_config(config_path, sets);

    if (synth->parsed()) {
        ToyDataset<float> ds = synth_dataset<float>(sy_count, sy_frames, sy_size, sy_size, sy_seed);
        fs::create_directories(sy_out);
        std::string manifest;
        for (size_t i = 0; i < ds.videos.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "clip_%03zu.nvrw", i);
            std::string path = (fs::path(sy_out) / name).string();
            track(path);
            write_nvrw(path, ds.videos[i]);
            manifest += std::string(name) + (static_cast<int64_t>(i) < ds.train_count ? " train\n" : " test\n");
        }
        std::string mpath = (fs::path(sy_out) / "manifest.txt").string();
        track(mpath);
        write_file(mpath, manifest.data(), manifest.size());
        std::printf("wrote %zu clips (%lld train, %lld held out) to %s\n", ds.videos.size(),
                    static_cast<long long>(ds.train_count), static_cast<long long>(ds.test_count()), sy_out.c_str());
        return 0;
    }

    if (fit->parsed()) {
        Tensor<float> video = read_nvrw<float>(ft_video);
        NervConfig nc = rc.nerv_for(video.dim(0));
        TrainConfig tc = rc.train;
        if (ft_steps > 0) tc.steps = ft_steps;
        double t0 = now_s();
        FitResult<float> fr = fit_nerv(nc, video, tc);
        double t1 = now_s();
        track(ft_out);
        int64_t bytes = write_nrvp(ft_out, nc, fr.weights, ft_bits);
        auto [nc2, wq] = read_nrvp<float>(ft_out);
        Tensor<float> dec2 = decode_video(nc2, wq);
        double qp = psnr(dec2, video);
        if (!ft_history.empty()) {
            track(ft_history);
            write_history_csv(ft_history, fr.history);
        }
        double pixels = double(video.dim(0)) * double(video.dim(2)) * double(video.dim(3));
        std::printf("fit %lld steps in %.1fs: train %.2f dB, stored@%d bits %.2f dB, %lld bytes (%.3f bpp)\n",
                    static_cast<long long>(tc.steps), t1 - t0, fr.psnr, ft_bits, qp, static_cast<long long>(bytes),
                    double(bytes) * 8.0 / pixels);
        return 0;
    }

    if (tre->parsed()) {
        ToyDataset<float> ds = load_clips(te_data);
        require(ds.test_count() >= 1, "train-enc: no held-out clips");
        const Tensor<float>& v0 = ds.videos[0];
        HypernetConfig hc = rc.hypernet(v0.dim(0), v0.dim(2), v0.dim(3));
        TrainConfig tc = rc.train;
        if (te_steps > 0)
            tc.steps = te_steps;
        else if (te_epochs > 0)
            tc.steps = te_epochs * ((ds.train_count + tc.batch - 1) / tc.batch);
        double t0 = now_s();
        TrainResult<float> tr = train_hypernet(hc, ds, tc);
        double t1 = now_s();
        track(te_out);
        save_checkpoint(te_out, hc, tr.params);
        if (!te_history.empty()) {
            track(te_history);
            write_history_csv(te_history, tr.history);
        }
        if (!te_evals.empty()) {
            track(te_evals);
            write_evals_csv(te_evals, tr.evals);
        }
        double last_loss = tr.history.empty() ? 0.0 : tr.history.back().loss;
        std::printf("trained %lld steps in %.1fs: final loss %.6g, held-out %.2f dB, %lld video-specific params, "
                    "saved %s\n",
                    static_cast<long long>(tc.steps), t1 - t0, last_loss, tr.final_eval_psnr,
                    static_cast<long long>(hc.tokens.param_count(hc.nerv)), te_out.c_str());
        return 0;
    }

    if (enc->parsed()) {
        auto [hc, params] = load_checkpoint(en_ckpt);
        Tensor<float> video = read_nvrw<float>(en_video);
        require(video.dim(0) == hc.frames() && video.dim(2) == hc.height && video.dim(3) == hc.width,
                "encode: video shape " + shape_str(video.shape()) + " does not match the checkpoint geometry");
        double t0 = now_s();
        NervWeights<float> w = hypernet_encode(hc, params, video);
        double t1 = now_s();
        track(en_out);
        int64_t bytes = write_nrvp(en_out, hc.nerv, w, en_bits);
        std::printf("encoded in %.3fs, wrote %lld bytes to %s\n", t1 - t0, static_cast<long long>(bytes),
                    en_out.c_str());
        return 0;
    }

    if (dec->parsed()) {
        std::vector<NervConfig> cfgs;
        std::vector<NervWeights<float>> models;
        for (const auto& p : de_models) {
            auto [c, w] = read_nrvp<float>(p);
            cfgs.push_back(c);
            models.push_back(std::move(w));
        }
        require(de_group >= 1, "decode: group must be positive");
        for (const auto& c : cfgs)
            require(de_group == 1 || c == cfgs[0], "decode: grouped decoding needs identical model configs");
        fs::create_directories(de_out);
        double t0 = now_s();
        std::vector<Tensor<float>> decoded(models.size());
        size_t i = 0;
        while (i < models.size()) {
            size_t g = std::min<size_t>(static_cast<size_t>(de_group), models.size() - i);
            std::vector<NervWeights<float>> chunk(models.begin() + i, models.begin() + i + g);
            WeightBatch<float> batch = stack_weights(cfgs[i], chunk);
            Tensor<float> all = decode_batch_all(batch);
            int64_t per = all.numel() / static_cast<int64_t>(g);
            for (size_t j = 0; j < g; ++j) {
                Tensor<float> v({cfgs[i].frame_count, 3, cfgs[i].output_size(), cfgs[i].output_size()});
                std::copy(all.data() + static_cast<int64_t>(j) * per, all.data() + static_cast<int64_t>(j + 1) * per,
                          v.data());
                decoded[i + j] = std::move(v);
            }
            i += g;
        }
        double t1 = now_s();
        int64_t frames = 0;
        for (size_t j = 0; j < decoded.size(); ++j) {
            std::string stem = fs::path(de_models[j]).stem().string();
            if (de_ppm) {
                int64_t F = decoded[j].dim(0), H = decoded[j].dim(2), W = decoded[j].dim(3);
                for (int64_t f = 0; f < F; ++f) {
                    Tensor<float> frame({3, H, W});
                    std::copy(decoded[j].data() + f * frame.numel(), decoded[j].data() + (f + 1) * frame.numel(),
                              frame.data());
                    char suffix[32];
                    std::snprintf(suffix, sizeof suffix, "_f%03lld.ppm", static_cast<long long>(f));
                    std::string path = (fs::path(de_out) / (stem + suffix)).string();
                    track(path);
                    write_ppm(path, frame);
                }
            } else {
                std::string path = (fs::path(de_out) / (stem + ".nvrw")).string();
                track(path);
                write_nvrw(path, decoded[j]);
            }
            frames += decoded[j].dim(0);
        }
        std::printf("decoded %zu videos (%lld frames) in %.3fs, %.1f videos/s\n", decoded.size(),
                    static_cast<long long>(frames), t1 - t0, double(decoded.size()) / (t1 - t0));
        return 0;
    }

    if (ben->parsed()) {
        NervConfig nc = rc.nerv_for(be_frames);
        std::vector<int64_t> groups = nervc::detail::parse_i64_list("--groups", be_groups);
        int threads = be_threads > 0 ? be_threads : max_threads();
        std::vector<ThroughputReport> rows = bench<float>(nc, groups, be_videos, threads, be_reps);
        std::printf("%6s %8s %8s %10s %12s\n", "group", "videos", "threads", "seconds", "videos/s");
        for (const auto& r : rows)
            std::printf("%6lld %8lld %8d %10.4f %12.2f\n", static_cast<long long>(r.group),
                        static_cast<long long>(r.videos), r.threads, r.seconds, r.vps);
        return 0;
    }

    if (met->parsed()) {
        Tensor<float> a = read_nvrw<float>(me_ref);
        Tensor<float> b = read_nvrw<float>(me_test);
        require(a.shape() == b.shape(),
                "metrics: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
        std::printf("psnr %.4f dB, ssim %.5f\n", psnr(b, a), ssim(b, a));
        return 0;
    }

    if (deg->parsed()) {
        Tensor<float> video = read_nvrw<float>(dg_video);
        Rng rng(dg_seed);
        Tensor<float> out = degrade(video, parse_degrade(dg_mode), rng);
        track(dg_out);
        write_nvrw(dg_out, out);
        std::printf("wrote %s (%s)\n", dg_out.c_str(), dg_mode.c_str());
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        remove_outputs();
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
