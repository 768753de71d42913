// wavestereo: stereo depth toolkit CLI.
//
// Subcommands: gen (synthetic scenes), match (stereo correspondence), refine
// (variational depth/normal refinement), eval (depth + normal metrics),
// analyze (frequency/texture statistics), bench (parameter sweeps). Every run
// is fully determined by (flags, config file, inputs, seed); artifacts of a
// failed run are removed.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wavestereo/config.hpp"
#include "wavestereo/core.hpp"
#include "wavestereo/geometry.hpp"
#include "wavestereo/io.hpp"
#include "wavestereo/metrics.hpp"
#include "wavestereo/pipeline.hpp"
#include "wavestereo/refine.hpp"
#include "wavestereo/rng.hpp"
#include "wavestereo/stereo.hpp"
#include "wavestereo/synth.hpp"
#include "wavestereo/wavelet.hpp"

namespace fs = std::filesystem;
using namespace ws;

namespace {

// Applies `key = value` lines from a config file to a subcommand's options.
// Explicitly passed flags win over the file; the file wins over defaults;
// unknown keys are errors. Keys are the long option names without the
// leading dashes (e.g. `plane-c = 4.0`).
void apply_config_file(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    const cfg::KeyValueConfig kv = cfg::KeyValueConfig::load(path);
    for (const auto& [key, value] : kv.entries()) {
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config")
            throw ConfigError("config file '" + path + "': unknown key '" + key + "'");
        if (opt->count() > 0) continue; // command line takes precedence
        opt->add_result(value);
        opt->run_callback();
    }
}

// Records every artifact written so a failed run can clean up after itself.
class ArtifactTracker {
public:
    fs::path track(const fs::path& p) {
        written_.push_back(p);
        return p;
    }
    void discard_all() noexcept {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::vector<fs::path> written_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_text(ArtifactTracker& tracker, const fs::path& path, const std::string& text) {
    tracker.track(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

StereoRig load_rig_or_default(const std::string& rig_path, int width, int height) {
    if (rig_path.empty()) return synth::default_rig(width, height);
    return cfg::rig_from_config(cfg::KeyValueConfig::load(rig_path));
}

DepthMap load_depth(const fs::path& path, double png_scale) {
    if (path.extension() == ".png") return io::read_depth_png16(path, png_scale);
    return pipeline::depth_from_image(io::read_pfm(path));
}

// ----------------------------------------------------------------- gen -----

struct GenArgs {
    std::string kind = "fronto_plane";
    std::string out_dir;
    std::string rig_path;
    std::string scene_config;
    int width = 512, height = 512;
    std::uint64_t seed = 0;
    double plane_c = 5.0, plane_a = 0.5;
    double sphere_cx = 0.0, sphere_cy = 0.0, sphere_cz = 6.0, sphere_r = 1.5;
    double background_c = 8.0;
    int fbm_octaves = 5;
    double fbm_gain = 0.5, fbm_base_depth = 6.0, fbm_amplitude = 1.0, fbm_frequency = 0.01;
    double tex_contrast = 0.3, tex_falloff = 1.2, tex_frequency = 0.8;
    int tex_octaves = 6;
    std::uint64_t tex_seed = 1;
    double noise_sigma = 0.0;
};

int run_gen(const GenArgs& a) {
    synth::SceneSpec spec;
    if (!a.scene_config.empty())
        spec = cfg::scene_spec_from_config(cfg::KeyValueConfig::load(a.scene_config));
    else {
        spec.kind = synth::scene_kind_from_string(a.kind);
        spec.width = a.width;
        spec.height = a.height;
        spec.rig = load_rig_or_default(a.rig_path, a.width, a.height);
        spec.plane_c = a.plane_c;
        spec.plane_a = a.plane_a;
        spec.sphere_cx = a.sphere_cx;
        spec.sphere_cy = a.sphere_cy;
        spec.sphere_cz = a.sphere_cz;
        spec.sphere_r = a.sphere_r;
        spec.background_c = a.background_c;
        spec.fbm_octaves = a.fbm_octaves;
        spec.fbm_gain = a.fbm_gain;
        spec.fbm_base_depth = a.fbm_base_depth;
        spec.fbm_amplitude = a.fbm_amplitude;
        spec.fbm_frequency = a.fbm_frequency;
        spec.seed = a.seed;
        spec.texture = synth::TextureParams{a.tex_contrast, a.tex_falloff, a.tex_octaves,
                                            a.tex_frequency, a.tex_seed};
    }

    ArtifactTracker tracker;
    try {
        fs::create_directories(a.out_dir);
        const fs::path dir(a.out_dir);

        synth::SynthScene scene = synth::gen_scene(spec);
        synth::render_stereo(scene, spec.texture);

        io::write_pfm(scene.left, tracker.track(dir / "left.pfm"));
        io::write_pfm(scene.right, tracker.track(dir / "right.pfm"));
        io::write_pfm(pipeline::image_from_depth(scene.depth_gt),
                      tracker.track(dir / "depth_gt.pfm"));
        io::write_pfm(pipeline::image_from_disparity(scene.disparity_gt),
                      tracker.track(dir / "disparity_gt.pfm"));
        io::write_normal_png(scene.normal_gt, tracker.track(dir / "normals_gt.png"));
        std::vector<std::uint8_t> occ(scene.occlusion.size());
        for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = scene.occlusion[i] ? 255 : 0;
        io::write_gray8_png(occ, spec.width, spec.height, tracker.track(dir / "occlusion.png"));

        if (a.noise_sigma > 0.0)
            io::write_pfm(pipeline::image_from_depth(
                              synth::add_noise(scene.depth_gt, a.noise_sigma, spec.seed + 1)),
                          tracker.track(dir / "depth_noisy.pfm"));

        cfg::scene_spec_to_config(spec).save(tracker.track(dir / "scene.cfg"));

        io::DatasetManifest manifest;
        manifest.rig = spec.rig;
        manifest.base_dir = dir;
        manifest.entries.push_back(io::ManifestEntry{"left.pfm", "right.pfm",
                                                     std::string("depth_gt.pfm"),
                                                     std::string("normals_gt.png")});
        io::write_manifest(manifest, tracker.track(dir / "manifest.txt"));
    } catch (...) {
        tracker.discard_all();
        throw;
    }
    return 0;
}

// --------------------------------------------------------------- match -----

struct MatchArgs {
    std::string left, right, rig_path, out_dir;
    std::string manifest; // batch mode: overrides --left/--right and the rig
    std::string metric = "sad";
    std::string agg = "sgm";
    std::string estimator = "wta";
    int window = 7;
    int max_disp = 0; // 0 = rig default
    double sgm_p1 = 0.1, sgm_p2 = 0.4;
    int paths = 8;
    double softmin_temp = 1.0;
    bool no_subpixel = false;
    bool no_lr_check = false;
    double lr_tol = 1.0;
    int wt_levels = 0;
    std::string wt_config;
};

pipeline::MatchOptions match_options(const MatchArgs& a) {
    pipeline::MatchOptions opts;
    opts.match.metric = stereo::cost_metric_from_string(a.metric);
    opts.match.window = a.window;
    opts.match.sgm_p1 = a.sgm_p1;
    opts.match.sgm_p2 = a.sgm_p2;
    opts.match.paths = a.paths;
    opts.match.softmin_temperature = a.softmin_temp;
    if (a.agg == "sgm") opts.use_sgm = true;
    else if (a.agg == "wta") opts.use_sgm = false;
    else throw ConfigError("--agg must be sgm or wta");
    if (a.estimator == "wta") opts.estimator = pipeline::MatchOptions::Estimator::Wta;
    else if (a.estimator == "softargmin")
        opts.estimator = pipeline::MatchOptions::Estimator::SoftArgmin;
    else throw ConfigError("--estimator must be wta or softargmin");
    opts.subpixel = !a.no_subpixel;
    opts.lr_check = !a.no_lr_check;
    opts.lr_tol = a.lr_tol;
    opts.wt_levels = a.wt_levels;
    if (!a.wt_config.empty())
        opts.wt_params = cfg::wtconv_params_from_config(cfg::KeyValueConfig::load(a.wt_config));
    return opts;
}

int run_match(const MatchArgs& a) {
    if (a.manifest.empty() && (a.left.empty() || a.right.empty()))
        throw ConfigError("match needs either --manifest or both --left and --right");
    const pipeline::MatchOptions opts = match_options(a);
    ArtifactTracker tracker;
    try {
        fs::create_directories(a.out_dir);
        const fs::path dir(a.out_dir);

        if (!a.manifest.empty()) {
            // Batch mode: every manifest entry, outputs in manifest order,
            // with an eval record whenever ground truth is present.
            const io::DatasetManifest manifest = io::read_manifest(a.manifest);
            StereoRig rig = manifest.rig;
            if (a.max_disp > 0)
                rig = StereoRig(rig.intrinsics, rig.baseline, a.max_disp, rig.min_depth,
                                rig.max_depth);
            std::ostringstream report;
            for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
                const io::ManifestEntry& e = manifest.entries[i];
                const Image left = io::read_pfm(manifest.resolve(e.left));
                const Image right = io::read_pfm(manifest.resolve(e.right));
                const pipeline::MatchResult result =
                    pipeline::match_stereo(left, right, rig, opts);
                char sub[32];
                std::snprintf(sub, sizeof(sub), "entry_%03zu", i);
                fs::create_directories(dir / sub);
                io::write_pfm(pipeline::image_from_disparity(result.disparity),
                              tracker.track(dir / sub / "disparity.pfm"));
                io::write_pfm(pipeline::image_from_depth(result.depth),
                              tracker.track(dir / sub / "depth.pfm"));
                report << "entry=" << i;
                if (e.depth_gt) {
                    const DepthMap gt =
                        load_depth(manifest.resolve(*e.depth_gt), manifest.depth_scale);
                    const metrics::DepthMetricsReport m = metrics::depth_metrics(
                        result.depth, gt, rig.min_depth, rig.max_depth);
                    report << " abs_rel=" << fmt(m.abs_rel) << " sq_rel=" << fmt(m.sq_rel)
                           << " rmse=" << fmt(m.rmse) << " log10=" << fmt(m.log10)
                           << " delta1=" << fmt(m.delta1) << " delta2=" << fmt(m.delta2)
                           << " delta3=" << fmt(m.delta3) << " n_valid=" << m.n_valid;
                }
                report << "\n";
            }
            write_text(tracker, dir / "batch.rec", report.str());
            return 0;
        }

        const Image left = io::read_pfm(a.left);
        const Image right = io::read_pfm(a.right);
        StereoRig rig = load_rig_or_default(a.rig_path, left.width(), left.height());
        if (a.max_disp > 0)
            rig = StereoRig(rig.intrinsics, rig.baseline, a.max_disp, rig.min_depth,
                            rig.max_depth);
        const pipeline::MatchResult result = pipeline::match_stereo(left, right, rig, opts);
        io::write_pfm(pipeline::image_from_disparity(result.disparity),
                      tracker.track(dir / "disparity.pfm"));
        io::write_pfm(pipeline::image_from_depth(result.depth),
                      tracker.track(dir / "depth.pfm"));
    } catch (...) {
        tracker.discard_all();
        throw;
    }
    return 0;
}

// -------------------------------------------------------------- refine -----

struct RefineArgs {
    std::string depth, rig_path, out_dir;
    int iterations = 5;
    double lambda_data = 1.0;
    double initial_step = 0.005;
    int renormal_every = 1;
    int normal_window = 5;
    double huber_delta = 1.0;
    double denom_eps = 1e-4, nz_eps = 1e-3;
    double png_scale = 15.0 / 65535.0;
};

int run_refine(const RefineArgs& a) {
    const DepthMap depth0 = load_depth(a.depth, a.png_scale);
    const StereoRig rig = load_rig_or_default(a.rig_path, depth0.width(), depth0.height());

    refine::RefineConfig rcfg;
    rcfg.iterations = a.iterations;
    rcfg.lambda_data = a.lambda_data;
    rcfg.initial_step = a.initial_step;
    rcfg.renormal_every = a.renormal_every;
    rcfg.normal_window = a.normal_window;
    rcfg.min_depth = rig.min_depth;
    rcfg.max_depth = rig.max_depth;

    geometry::ConsistencyConfig ccfg;
    ccfg.huber_delta = a.huber_delta;
    ccfg.denom_epsilon = a.denom_eps;
    ccfg.nz_epsilon = a.nz_eps;

    ArtifactTracker tracker;
    try {
        fs::create_directories(a.out_dir);
        const fs::path dir(a.out_dir);
        const refine::RefineResult result =
            refine::refine_depth(depth0, rig.intrinsics, rcfg, ccfg);
        io::write_pfm(pipeline::image_from_depth(result.depth),
                      tracker.track(dir / "depth_refined.pfm"));
        io::write_normal_png(result.normals, tracker.track(dir / "normals_refined.png"));
        write_text(tracker, dir / "trace.txt", result.trace.to_text());
    } catch (...) {
        tracker.discard_all();
        throw;
    }
    return 0;
}

// ---------------------------------------------------------------- eval -----

struct EvalArgs {
    std::string pred, gt;
    std::string pred_normals, gt_normals;
    std::string rig_path;
    std::string report_path, machine_path;
    double clip_min = 0.0, clip_max = 0.0; // 0 = take from rig / defaults
    double png_scale = 15.0 / 65535.0;
};

int run_eval(const EvalArgs& a) {
    double clip_min = a.clip_min, clip_max = a.clip_max;
    if (clip_min <= 0.0 || clip_max <= 0.0) {
        const StereoRig rig = load_rig_or_default(a.rig_path, 2, 2);
        if (clip_min <= 0.0) clip_min = rig.min_depth;
        if (clip_max <= 0.0) clip_max = rig.max_depth;
    }

    std::ostringstream report, machine;
    report.setf(std::ios::fixed);
    report.precision(6);

    const DepthMap pred = load_depth(a.pred, a.png_scale);
    const DepthMap gt = load_depth(a.gt, a.png_scale);
    const metrics::DepthMetricsReport d = metrics::depth_metrics(pred, gt, clip_min, clip_max);
    report << "depth metrics (clip [" << clip_min << ", " << clip_max << "] m, "
           << d.n_valid << " px)\n";
    report << "  abs_rel  " << d.abs_rel << "\n  sq_rel   " << d.sq_rel << "\n  rmse     "
           << d.rmse << "\n  log10    " << d.log10 << "\n  delta1   " << d.delta1
           << "\n  delta2   " << d.delta2 << "\n  delta3   " << d.delta3 << "\n";
    machine << "type=depth abs_rel=" << fmt(d.abs_rel) << " sq_rel=" << fmt(d.sq_rel)
            << " rmse=" << fmt(d.rmse) << " log10=" << fmt(d.log10)
            << " delta1=" << fmt(d.delta1) << " delta2=" << fmt(d.delta2)
            << " delta3=" << fmt(d.delta3) << " n_valid=" << d.n_valid << "\n";

    if (!a.pred_normals.empty() && !a.gt_normals.empty()) {
        const NormalMap pn = io::read_normal_png(a.pred_normals);
        const NormalMap gn = io::read_normal_png(a.gt_normals);
        const metrics::NormalMetricsReport nm = metrics::normal_metrics(pn, gn);
        report << "normal metrics (" << nm.n_valid << " px)\n";
        report << "  mean_deg    " << nm.mean_deg << "\n  median_deg  " << nm.median_deg
               << "\n  rmse_deg    " << nm.rmse_deg << "\n  pct_11.25   " << nm.pct_11_25
               << "\n  pct_22.5    " << nm.pct_22_5 << "\n  pct_30      " << nm.pct_30
               << "\n";
        machine << "type=normal mean_deg=" << fmt(nm.mean_deg)
                << " median_deg=" << fmt(nm.median_deg) << " rmse_deg=" << fmt(nm.rmse_deg)
                << " pct_11_25=" << fmt(nm.pct_11_25) << " pct_22_5=" << fmt(nm.pct_22_5)
                << " pct_30=" << fmt(nm.pct_30) << " n_valid=" << nm.n_valid << "\n";
    }

    std::cout << report.str();
    ArtifactTracker tracker;
    try {
        if (!a.report_path.empty()) write_text(tracker, a.report_path, report.str());
        if (!a.machine_path.empty()) write_text(tracker, a.machine_path, machine.str());
    } catch (...) {
        tracker.discard_all();
        throw;
    }
    return 0;
}

// ------------------------------------------------------------- analyze -----

struct AnalyzeArgs {
    std::string image;
    double cutoff = 0.1;
    std::string report_path, machine_path;
};

int run_analyze(const AnalyzeArgs& a) {
    const Image img = io::read_pfm(a.image);
    const wavelet::SpectralEnergyRatio ser = wavelet::frequency_energy_ratio(img, a.cutoff);
    const double entropy = wavelet::lbp_entropy(img);

    std::ostringstream report, machine;
    report.setf(std::ios::fixed);
    report.precision(6);
    report << "frequency analysis of " << fs::path(a.image).filename().string() << " ("
           << img.width() << "x" << img.height() << ")\n";
    report << "  energy fraction above " << a.cutoff << " f_max: " << ser.ratio
           << (ser.degenerate ? "  (degenerate: no non-DC energy)" : "") << "\n";
    report << "  lbp entropy: " << entropy << " bits\n";
    machine << "type=analysis frequency_ratio=" << fmt(ser.ratio)
            << " degenerate=" << (ser.degenerate ? 1 : 0)
            << " cutoff_frac=" << fmt(a.cutoff) << " lbp_entropy_bits=" << fmt(entropy)
            << "\n";

    std::cout << report.str();
    ArtifactTracker tracker;
    try {
        if (!a.report_path.empty()) write_text(tracker, a.report_path, report.str());
        if (!a.machine_path.empty()) write_text(tracker, a.machine_path, machine.str());
    } catch (...) {
        tracker.discard_all();
        throw;
    }
    return 0;
}

// --------------------------------------------------------------- bench -----

struct BenchArgs {
    std::string out_dir;
    std::string sweep = "both"; // irm | wt | both
    int size = 128;
    int scenes = 8;
    std::uint64_t seed = 7;
    double noise_sigma = 0.02;
};

synth::SceneSpec bench_scene(int index, int size, std::uint64_t seed) {
    synth::SceneSpec spec;
    spec.width = size;
    spec.height = size;
    spec.rig = StereoRig(intrinsics_from_fov(46.5, size, size), 0.270, 64, 0.5, 15.0);
    spec.seed = seed + static_cast<std::uint64_t>(index);
    spec.texture.seed = spec.seed * 7919 + 13;
    switch (index % 4) {
    case 0:
        spec.kind = synth::SceneKind::FrontoPlane;
        spec.plane_c = 4.0 + (index % 3);
        break;
    case 1:
        spec.kind = synth::SceneKind::InclinedPlane;
        spec.plane_a = 0.2 + 0.1 * (index % 4);
        spec.plane_c = 5.0;
        break;
    case 2:
        spec.kind = synth::SceneKind::Sphere;
        spec.sphere_cz = 6.0;
        spec.sphere_r = 1.2;
        spec.background_c = 9.0;
        break;
    default:
        spec.kind = synth::SceneKind::FbmTerrain;
        spec.fbm_base_depth = 6.0;
        spec.fbm_amplitude = 0.8;
        spec.fbm_frequency = 0.02;
        break;
    }
    return spec;
}

int run_bench(const BenchArgs& a) {
    ArtifactTracker tracker;
    try {
        fs::create_directories(a.out_dir);
        const fs::path dir(a.out_dir);

        if (a.sweep == "irm" || a.sweep == "both") {
            // Refinement iteration sweep on noisy synthetic depth.
            std::ostringstream table, machine;
            table << "# refinement iteration sweep: " << a.scenes
                  << " noisy scenes, sigma_rel=" << a.noise_sigma << ", size=" << a.size
                  << ", seed=" << a.seed << "\n";
            table << "iterations  abs_rel   sq_rel    rmse      delta1\n";
            std::vector<synth::SynthScene> scenes;
            std::vector<DepthMap> noisy;
            for (int i = 0; i < a.scenes; ++i) {
                scenes.push_back(synth::gen_scene(bench_scene(i, a.size, a.seed)));
                noisy.push_back(synth::add_noise(scenes.back().depth_gt, a.noise_sigma,
                                                 a.seed + 1000 + i));
            }
            for (int iters = 1; iters <= 5; ++iters) {
                double abs_rel = 0, sq_rel = 0, rmse = 0, delta1 = 0;
                for (int i = 0; i < a.scenes; ++i) {
                    refine::RefineConfig rcfg;
                    rcfg.iterations = iters;
                    rcfg.min_depth = scenes[i].rig.min_depth;
                    rcfg.max_depth = scenes[i].rig.max_depth;
                    const geometry::ConsistencyConfig ccfg;
                    const refine::RefineResult res = refine::refine_depth(
                        noisy[i], scenes[i].rig.intrinsics, rcfg, ccfg);
                    const metrics::DepthMetricsReport m = metrics::depth_metrics(
                        res.depth, scenes[i].depth_gt, scenes[i].rig.min_depth,
                        scenes[i].rig.max_depth);
                    abs_rel += m.abs_rel;
                    sq_rel += m.sq_rel;
                    rmse += m.rmse;
                    delta1 += m.delta1;
                }
                const double inv = 1.0 / a.scenes;
                table << iters << "           " << fmt(abs_rel * inv) << "  "
                      << fmt(sq_rel * inv) << "  " << fmt(rmse * inv) << "  "
                      << fmt(delta1 * inv) << "\n";
                machine << "type=irm_sweep iterations=" << iters
                        << " abs_rel=" << fmt(abs_rel * inv) << " sq_rel=" << fmt(sq_rel * inv)
                        << " rmse=" << fmt(rmse * inv) << " delta1=" << fmt(delta1 * inv)
                        << "\n";
            }
            write_text(tracker, dir / "irm_sweep.txt", table.str());
            write_text(tracker, dir / "irm_sweep.rec", machine.str());
            std::cout << table.str();
        }

        if (a.sweep == "wt" || a.sweep == "both") {
            // Decomposition-level sweep: wavelet-enhanced preprocessing of both
            // views ahead of classical matching.
            std::ostringstream table, machine;
            table << "# wavelet level sweep: " << a.scenes << " textured scenes, size="
                  << a.size << ", seed=" << a.seed << "\n";
            table << "levels  abs_rel   sq_rel    rmse      delta1\n";
            std::vector<synth::SynthScene> scenes;
            for (int i = 0; i < a.scenes; ++i) {
                const synth::SceneSpec spec = bench_scene(i, a.size, a.seed + 500);
                scenes.push_back(synth::gen_scene(spec));
                synth::render_stereo(scenes.back(), spec.texture);
            }
            for (int levels = 2; levels <= 5; ++levels) {
                double abs_rel = 0, sq_rel = 0, rmse = 0, delta1 = 0;
                for (int i = 0; i < a.scenes; ++i) {
                    pipeline::MatchOptions opts;
                    opts.wt_levels = levels;
                    const pipeline::MatchResult res = pipeline::match_stereo(
                        scenes[i].left, scenes[i].right, scenes[i].rig, opts);
                    const metrics::DepthMetricsReport m = metrics::depth_metrics(
                        res.depth, scenes[i].depth_gt, scenes[i].rig.min_depth,
                        scenes[i].rig.max_depth);
                    abs_rel += m.abs_rel;
                    sq_rel += m.sq_rel;
                    rmse += m.rmse;
                    delta1 += m.delta1;
                }
                const double inv = 1.0 / a.scenes;
                table << levels << "       " << fmt(abs_rel * inv) << "  "
                      << fmt(sq_rel * inv) << "  " << fmt(rmse * inv) << "  "
                      << fmt(delta1 * inv) << "\n";
                machine << "type=wt_sweep levels=" << levels
                        << " abs_rel=" << fmt(abs_rel * inv) << " sq_rel=" << fmt(sq_rel * inv)
                        << " rmse=" << fmt(rmse * inv) << " delta1=" << fmt(delta1 * inv)
                        << "\n";
            }
            write_text(tracker, dir / "wt_sweep.txt", table.str());
            write_text(tracker, dir / "wt_sweep.rec", machine.str());
            std::cout << table.str();
        }
    } catch (...) {
        tracker.discard_all();
        throw;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavestereo: wavelet-enhanced stereo depth toolkit"};
    app.require_subcommand(1);

    std::string config_path[6];
    GenArgs gen;
    CLI::App* sub_gen = app.add_subcommand("gen", "Generate a synthetic stereo scene");
    sub_gen->add_option("--config", config_path[0], "Read defaults from a key = value file");
    sub_gen->add_option("--kind", gen.kind,
                        "fronto_plane | inclined_plane | sphere | fbm_terrain");
    sub_gen->add_option("--out", gen.out_dir, "Output directory")->required();
    sub_gen->add_option("--rig", gen.rig_path, "Rig config file (rig.* keys)");
    sub_gen->add_option("--scene-config", gen.scene_config,
                        "Full scene spec config (overrides other scene flags)");
    sub_gen->add_option("--width", gen.width);
    sub_gen->add_option("--height", gen.height);
    sub_gen->add_option("--seed", gen.seed);
    sub_gen->add_option("--plane-c", gen.plane_c, "Plane depth on the principal ray, m");
    sub_gen->add_option("--plane-a", gen.plane_a, "Inclined plane slope");
    sub_gen->add_option("--sphere-cx", gen.sphere_cx);
    sub_gen->add_option("--sphere-cy", gen.sphere_cy);
    sub_gen->add_option("--sphere-cz", gen.sphere_cz);
    sub_gen->add_option("--sphere-r", gen.sphere_r);
    sub_gen->add_option("--background-c", gen.background_c);
    sub_gen->add_option("--fbm-octaves", gen.fbm_octaves);
    sub_gen->add_option("--fbm-gain", gen.fbm_gain);
    sub_gen->add_option("--fbm-base-depth", gen.fbm_base_depth);
    sub_gen->add_option("--fbm-amplitude", gen.fbm_amplitude);
    sub_gen->add_option("--fbm-frequency", gen.fbm_frequency);
    sub_gen->add_option("--texture-contrast", gen.tex_contrast);
    sub_gen->add_option("--texture-falloff", gen.tex_falloff, "Spectral falloff exponent");
    sub_gen->add_option("--texture-octaves", gen.tex_octaves);
    sub_gen->add_option("--texture-frequency", gen.tex_frequency);
    sub_gen->add_option("--texture-seed", gen.tex_seed);
    sub_gen->add_option("--noise-sigma", gen.noise_sigma,
                        "Also write depth_noisy.pfm with this relative noise");

    MatchArgs match;
    CLI::App* sub_match = app.add_subcommand("match", "Stereo correspondence on a rectified pair");
    sub_match->add_option("--config", config_path[1], "Read defaults from a key = value file");
    sub_match->add_option("--left", match.left, "Left image (PFM)");
    sub_match->add_option("--right", match.right, "Right image (PFM)");
    sub_match->add_option("--manifest", match.manifest,
                          "Batch mode: process every manifest entry");
    sub_match->add_option("--rig", match.rig_path, "Rig config file");
    sub_match->add_option("--out", match.out_dir, "Output directory")->required();
    sub_match->add_option("--metric", match.metric, "ssd | sad | ncc");
    sub_match->add_option("--window", match.window, "Matching window (odd)");
    sub_match->add_option("--max-disp", match.max_disp, "Disparity hypotheses (0 = rig)");
    sub_match->add_option("--agg", match.agg, "sgm | wta (raw volume)");
    sub_match->add_option("--estimator", match.estimator, "wta | softargmin");
    sub_match->add_option("--sgm-p1", match.sgm_p1);
    sub_match->add_option("--sgm-p2", match.sgm_p2);
    sub_match->add_option("--paths", match.paths, "SGM paths: 4 or 8");
    sub_match->add_option("--softmin-temp", match.softmin_temp);
    sub_match->add_flag("--no-subpixel", match.no_subpixel);
    sub_match->add_flag("--no-lr-check", match.no_lr_check);
    sub_match->add_option("--lr-tol", match.lr_tol, "Left-right tolerance, px");
    sub_match->add_option("--wt-levels", match.wt_levels,
                          "Wavelet-enhanced preprocessing levels (0 = off)");
    sub_match->add_option("--wt-config", match.wt_config, "Wavelet operator config file");

    RefineArgs refine_args;
    CLI::App* sub_refine = app.add_subcommand("refine", "Variational depth/normal refinement");
    sub_refine->add_option("--config", config_path[2], "Read defaults from a key = value file");
    sub_refine->add_option("--depth", refine_args.depth, "Input depth (PFM or 16-bit PNG)")
        ->required();
    sub_refine->add_option("--rig", refine_args.rig_path, "Rig config file");
    sub_refine->add_option("--out", refine_args.out_dir, "Output directory")->required();
    sub_refine->add_option("--iterations", refine_args.iterations);
    sub_refine->add_option("--lambda-data", refine_args.lambda_data);
    sub_refine->add_option("--initial-step", refine_args.initial_step,
                           "Max per-pixel move per iteration, normalized units");
    sub_refine->add_option("--renormal-every", refine_args.renormal_every);
    sub_refine->add_option("--normal-window", refine_args.normal_window);
    sub_refine->add_option("--huber-delta", refine_args.huber_delta);
    sub_refine->add_option("--denom-eps", refine_args.denom_eps);
    sub_refine->add_option("--nz-eps", refine_args.nz_eps);
    sub_refine->add_option("--png-scale", refine_args.png_scale, "Meters per 16-bit unit");

    EvalArgs eval_args;
    CLI::App* sub_eval = app.add_subcommand("eval", "Depth (and normal) metrics");
    sub_eval->add_option("--config", config_path[3], "Read defaults from a key = value file");
    sub_eval->add_option("--pred", eval_args.pred, "Predicted depth")->required();
    sub_eval->add_option("--gt", eval_args.gt, "Ground-truth depth")->required();
    sub_eval->add_option("--pred-normals", eval_args.pred_normals, "Predicted normal PNG");
    sub_eval->add_option("--gt-normals", eval_args.gt_normals, "Ground-truth normal PNG");
    sub_eval->add_option("--rig", eval_args.rig_path, "Rig config (for the clip range)");
    sub_eval->add_option("--clip-min", eval_args.clip_min, "Ground-truth clip minimum, m");
    sub_eval->add_option("--clip-max", eval_args.clip_max, "Ground-truth clip maximum, m");
    sub_eval->add_option("--report", eval_args.report_path, "Write the text report here");
    sub_eval->add_option("--machine", eval_args.machine_path, "Write machine records here");
    sub_eval->add_option("--png-scale", eval_args.png_scale);

    AnalyzeArgs analyze_args;
    CLI::App* sub_analyze = app.add_subcommand("analyze", "Frequency and texture statistics");
    sub_analyze->add_option("--config", config_path[4], "Read defaults from a key = value file");
    sub_analyze->add_option("--image", analyze_args.image, "Input image (PFM)")->required();
    sub_analyze->add_option("--cutoff", analyze_args.cutoff, "Radial cutoff as fraction of f_max");
    sub_analyze->add_option("--report", analyze_args.report_path);
    sub_analyze->add_option("--machine", analyze_args.machine_path);

    BenchArgs bench;
    CLI::App* sub_bench = app.add_subcommand("bench", "Parameter sweeps on synthetic suites");
    sub_bench->add_option("--config", config_path[5], "Read defaults from a key = value file");
    sub_bench->add_option("--out", bench.out_dir, "Output directory")->required();
    sub_bench->add_option("--sweep", bench.sweep, "irm | wt | both");
    sub_bench->add_option("--size", bench.size, "Scene edge length, px");
    sub_bench->add_option("--scenes", bench.scenes, "Scenes per suite");
    sub_bench->add_option("--seed", bench.seed);
    sub_bench->add_option("--noise-sigma", bench.noise_sigma);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sub_gen->parsed()) {
            apply_config_file(sub_gen, config_path[0]);
            return run_gen(gen);
        }
        if (sub_match->parsed()) {
            apply_config_file(sub_match, config_path[1]);
            return run_match(match);
        }
        if (sub_refine->parsed()) {
            apply_config_file(sub_refine, config_path[2]);
            return run_refine(refine_args);
        }
        if (sub_eval->parsed()) {
            apply_config_file(sub_eval, config_path[3]);
            return run_eval(eval_args);
        }
        if (sub_analyze->parsed()) {
            apply_config_file(sub_analyze, config_path[4]);
            return run_analyze(analyze_args);
        }
        if (sub_bench->parsed()) {
            apply_config_file(sub_bench, config_path[5]);
            return run_bench(bench);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
