#include "sdprop/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <omp.h>
#include <sstream>

#include <CLI11.hpp>

#include "sdprop/affinity.hpp"
#include "sdprop/image_io.hpp"
#include "sdprop/metrics.hpp"
#include "sdprop/pyramid.hpp"
#include "sdprop/sampling.hpp"
#include "sdprop/synth.hpp"

namespace sdprop {

namespace fs = std::filesystem;

namespace {

void apply_threads(int threads) {
    if (threads == 0) {
        const char* env = std::getenv("SDPROP_THREADS");
        if (env)
            threads = std::atoi(env);
    }
    if (threads > 0)
        omp_set_num_threads(threads);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f)
        throw error("cannot open for writing: " + path);
    f << text;
    if (!f)
        throw error("short write: " + path);
}

struct CompleteOptions {
    PyramidConfig pyr;
    std::string mode = "conf";
    BilateralParams bp;
};

// config file: one "key value" pair per line, # comments; CLI flags override
void apply_config_file(const std::string& path, CompleteOptions& o,
                       const std::map<std::string, bool>& flag_given) {
    std::ifstream f(path);
    if (!f)
        throw error("cannot open config file: " + path);
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key.empty())
            continue;
        auto want_num = [&](double& dst) {
            double v;
            if (!(ss >> v))
                throw error("config: bad value for " + key);
            dst = v;
        };
        auto want_int = [&](int& dst) {
            double v = 0;
            want_num(v);
            dst = int(v);
        };
        bool overridden = flag_given.count(key) && flag_given.at(key);
        if (key == "scales") {
            int v;
            want_int(v);
            if (!overridden)
                o.pyr.n_scales = v;
        } else if (key == "iters") {
            int v;
            want_int(v);
            if (!overridden)
                o.pyr.iters_per_scale = v;
        } else if (key == "dilation") {
            int v;
            want_int(v);
            if (!overridden)
                o.pyr.base_dilation = v;
        } else if (key == "dilation_step") {
            int v;
            want_int(v);
            if (!overridden)
                o.pyr.dilation_increment = v;
        } else if (key == "mode") {
            std::string m;
            if (!(ss >> m) || (m != "hard" && m != "conf"))
                throw error("config: mode must be hard or conf");
            if (!overridden)
                o.mode = m;
        } else if (key == "sigma_color") {
            double v;
            want_num(v);
            if (!overridden)
                o.bp.sigma_color = v;
        } else if (key == "sigma_normal") {
            double v;
            want_num(v);
            if (!overridden)
                o.bp.sigma_normal = v;
        } else if (key == "center_bias") {
            double v;
            want_num(v);
            if (!overridden)
                o.bp.center_bias = v;
        } else {
            throw error("config: unknown key " + key);
        }
    }
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, double gt_density,
              long long seed) {
    SceneSpec spec = read_scene_spec(spec_path);
    if (seed >= 0)
        spec.params["noise_seed"] = double(seed);
    fs::create_directories(out_dir);
    std::vector<ViewRender> renders = render_scene(spec);
    for (size_t i = 0; i < renders.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "view_%03zu", i);
        fs::path vdir = fs::path(out_dir) / name;
        fs::create_directories(vdir);
        write_ppm((vdir / "color.ppm").string(), renders[i].color);
        write_pfm((vdir / "depth.pfm").string(), renders[i].depth);
        write_pfm_normals((vdir / "normals.pfm").string(), renders[i].normals);
        write_pgm_mask((vdir / "mask.pgm").string(), renders[i].texture_mask);
    }
    std::vector<CameraView> views = spec.views;
    write_cameras((fs::path(out_dir) / "cameras.txt").string(), views);
    if (gt_density > 0.0)
        write_ply((fs::path(out_dir) / "gt_cloud.ply").string(), gt_cloud(spec, gt_density));
    std::cout << "synth: wrote " << renders.size() << " views to " << out_dir << "\n";
    return 0;
}

int cmd_sample(const std::string& gt_path, const std::string& color_path, const std::string& mode,
               int max_samples, uint64_t seed, double response_threshold, int nms_radius,
               const std::string& out_path) {
    DepthGrid gt = read_pfm(gt_path);
    SamplerConfig cfg;
    cfg.max_samples = max_samples;
    cfg.rng_seed = seed;
    cfg.detector.response_threshold = response_threshold;
    cfg.detector.nms_radius = nms_radius;
    SparseDepth s;
    if (mode == "uniform") {
        cfg.mode = SampleMode::uniform;
        s = sample_uniform(gt, cfg);
    } else if (mode == "keypoint") {
        cfg.mode = SampleMode::keypoint;
        if (color_path.empty())
            throw error("sample: keypoint mode needs --color");
        s = sample_keypoints(gt, read_ppm(color_path), cfg);
    } else {
        throw error("sample: mode must be uniform or keypoint");
    }
    write_sparse_depth(out_path, s);
    std::cout << "sample: " << s.entries.size() << " entries -> " << out_path << "\n";
    return 0;
}

int cmd_complete(const std::string& color_path, const std::string& normals_path,
                 const std::string& sparse_path, const std::string& gt_path,
                 const std::string& out_dir, const CompleteOptions& o,
                 const std::string& affinity_dump) {
    ColorGrid color = read_ppm(color_path);
    NormalGrid normals = read_pfm_normals(normals_path);
    SparseDepth sparse = read_sparse_depth(sparse_path);
    DepthGrid gt;
    if (!gt_path.empty())
        gt = read_pfm(gt_path);

    o.pyr.validate();
    PropagationMode mode =
        o.mode == "hard" ? PropagationMode::hard_replace : PropagationMode::confidence_blend;

    ScaleBundle bundle =
        build_scale_bundle(color, normals, sparse, gt, o.pyr, make_bilateral_provider(o.bp));
    std::vector<DepthGrid> preds = run_coarse_to_fine(bundle, o.pyr, mode);

    fs::create_directories(out_dir);
    for (size_t k = 0; k < preds.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "scale_%zu.pfm", k);
        write_pfm((fs::path(out_dir) / name).string(), preds[k]);
    }
    write_pfm((fs::path(out_dir) / "depth.pfm").string(), preds.back());
    if (!affinity_dump.empty())
        write_affinity_dump(affinity_dump, bundle.affinity.back());

    if (gt.width > 0) {
        DepthMetrics m = depth_metrics(preds.back(), gt);
        std::ostringstream kv;
        kv << depth_metrics_kv(m);
        kv << "loss " << multiscale_loss(preds, build_gt_pyramid(gt, o.pyr.n_scales)) << "\n";
        write_text((fs::path(out_dir) / "metrics.txt").string(), kv.str());
        std::cout << depth_metrics_table(m);
    }
    std::cout << "complete: wrote " << preds.size() << " scales to " << out_dir << "\n";
    return 0;
}

int cmd_fuse(const std::string& cameras_path, const std::vector<std::string>& depth_paths,
             double threshold, int min_views, const std::string& out_path) {
    std::vector<CameraView> cams = read_cameras(cameras_path);
    if (cams.size() != depth_paths.size())
        throw error("fuse: need exactly one depth map per camera");
    std::vector<DepthGrid> depths;
    depths.reserve(depth_paths.size());
    for (const std::string& p : depth_paths)
        depths.push_back(read_pfm(p));
    std::vector<std::pair<CameraView, const DepthGrid*>> views;
    for (size_t i = 0; i < cams.size(); ++i)
        views.push_back({cams[i], &depths[i]});
    FusionConfig cfg;
    cfg.depth_threshold = threshold;
    cfg.min_consistent_views = min_views;
    PointCloud cloud = fuse_depths(views, cfg);
    write_ply(out_path, cloud);
    std::cout << "fuse: " << cloud.points.size() << " points -> " << out_path << "\n";
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& sparse_path, double bin_width, const std::string& pred_cloud,
             const std::string& gt_cloud_path, double threshold, const std::string& out_path) {
    std::ostringstream kv;
    kv.precision(9);
    if (!pred_cloud.empty()) {
        if (gt_cloud_path.empty())
            throw error("eval: --pred-cloud needs --gt-cloud");
        CloudMetrics m = cloud_metrics(read_ply(pred_cloud), read_ply(gt_cloud_path), threshold);
        kv << cloud_metrics_kv(m);
        std::printf("  accuracy     %8.2f %%\n  completeness %8.2f %%\n  f1           %8.2f %%\n",
                    m.accuracy, m.completeness, m.f1);
    } else {
        if (pred_path.empty() || gt_path.empty())
            throw error("eval: need --pred and --gt (or cloud flags)");
        DepthGrid pred = read_pfm(pred_path);
        DepthGrid gt = read_pfm(gt_path);
        DepthMetrics m = depth_metrics(pred, gt);
        kv << depth_metrics_kv(m);
        std::cout << depth_metrics_table(m);
        if (!sparse_path.empty()) {
            SparseDepth sparse = read_sparse_depth(sparse_path);
            auto bins = error_vs_distance(pred, gt, sparse, bin_width);
            kv << "evd_bin_width " << bin_width << "\n";
            for (size_t b = 0; b < bins.size(); ++b) {
                kv << "evd_rel_" << b << " " << bins[b].mean_rel << "\n";
                kv << "evd_count_" << b << " " << bins[b].count << "\n";
            }
        }
    }
    if (!out_path.empty())
        write_text(out_path, kv.str());
    return 0;
}

int cmd_rf(int scales, int iters, int dilation, int dilation_step, int grid,
           const std::string& out_path) {
    PyramidConfig cfg;
    cfg.n_scales = scales;
    cfg.iters_per_scale = iters;
    cfg.base_dilation = dilation;
    cfg.dilation_increment = dilation_step;
    ReachReport rep = grid > 0 ? receptive_field(cfg, grid, grid) : receptive_field_autosize(cfg);
    std::ostringstream kv;
    kv.precision(9);
    kv << "radius " << rep.radius << "\n";
    kv << "area " << rep.area << "\n";
    kv << "area_ratio " << rep.area_ratio << "\n";
    kv << "grid " << rep.grid_w << " " << rep.grid_h << "\n";
    if (!out_path.empty())
        write_text(out_path, kv.str());
    std::printf("  radius %d px\n  area %lld px\n  ratio vs baseline %.2fx\n", rep.radius,
                rep.area, rep.area_ratio);
    return 0;
}

} // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"sparse depth propagation, completion, fusion and evaluation"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = SDPROP_THREADS env or default)");

    // synth
    auto* synth = app.add_subcommand("synth", "render a synthetic scene to disk");
    std::string sy_spec, sy_out = "scene_out";
    double sy_density = 0.0;
    long long sy_seed = -1;
    synth->add_option("--spec", sy_spec, "scene spec file")->required();
    synth->add_option("--out", sy_out, "output directory");
    synth->add_option("--gt-density", sy_density, "GT cloud samples per m^2 (0 = skip)");
    synth->add_option("--seed", sy_seed, "noise texture seed override");

    // sample
    auto* sample = app.add_subcommand("sample", "draw sparse depth from a dense depth map");
    std::string sa_gt, sa_color, sa_mode = "keypoint", sa_out = "sparse.txt";
    int sa_max = 800, sa_nms = 4;
    uint64_t sa_seed = 0;
    double sa_thresh = 1e-4;
    sample->add_option("--gt", sa_gt, "dense depth PFM")->required();
    sample->add_option("--color", sa_color, "color PPM (keypoint mode)");
    sample->add_option("--mode", sa_mode, "uniform | keypoint");
    sample->add_option("--max-samples", sa_max, "sample cap");
    sample->add_option("--seed", sa_seed, "RNG seed (uniform mode)");
    sample->add_option("--response-threshold", sa_thresh, "detector response threshold");
    sample->add_option("--nms-radius", sa_nms, "detector NMS radius");
    sample->add_option("--out", sa_out, "output sparse depth file");

    // complete
    auto* complete = app.add_subcommand("complete", "propagate sparse depth to a dense map");
    std::string co_color, co_normals, co_sparse, co_gt, co_out = "complete_out", co_config,
                co_aff;
    CompleteOptions co;
    complete->add_option("--color", co_color, "color PPM")->required();
    complete->add_option("--normals", co_normals, "normals PFM")->required();
    complete->add_option("--sparse", co_sparse, "sparse depth file")->required();
    complete->add_option("--gt", co_gt, "GT depth PFM for metrics");
    complete->add_option("--out", co_out, "output directory");
    auto* f_scales = complete->add_option("--scales", co.pyr.n_scales, "pyramid scales");
    auto* f_iters = complete->add_option("--iters", co.pyr.iters_per_scale, "iterations per scale");
    auto* f_dil = complete->add_option("--dilation", co.pyr.base_dilation, "coarsest dilation");
    auto* f_step =
        complete->add_option("--dilation-step", co.pyr.dilation_increment, "dilation increment");
    auto* f_mode = complete->add_option("--mode", co.mode, "hard | conf")
                       ->check(CLI::IsMember({"hard", "conf"}));
    auto* f_sc = complete->add_option("--sigma-color", co.bp.sigma_color, "affinity color sigma");
    auto* f_sn =
        complete->add_option("--sigma-normal", co.bp.sigma_normal, "affinity normal sigma");
    auto* f_cb = complete->add_option("--center-bias", co.bp.center_bias, "affinity center bias");
    complete->add_option("--config", co_config, "key-value config file");
    complete->add_option("--dump-affinity", co_aff, "write the finest-scale affinity field");

    // fuse
    auto* fuse = app.add_subcommand("fuse", "fuse per-view depth maps into a point cloud");
    std::string fu_cams, fu_out = "cloud.ply";
    std::vector<std::string> fu_depths;
    double fu_thresh = 0.1;
    int fu_min_views = 2;
    fuse->add_option("--cameras", fu_cams, "camera list file")->required();
    fuse->add_option("--depth", fu_depths, "depth PFM per camera, in camera order")->required();
    fuse->add_option("--threshold", fu_thresh, "depth consistency threshold (m)");
    fuse->add_option("--min-views", fu_min_views, "required consistent views");
    fuse->add_option("--out", fu_out, "output PLY");

    // eval
    auto* eval = app.add_subcommand("eval", "depth or point-cloud metrics");
    std::string ev_pred, ev_gt, ev_sparse, ev_pc, ev_gc, ev_out;
    double ev_bin = 8.0, ev_thresh = 0.02;
    eval->add_option("--pred", ev_pred, "predicted depth PFM");
    eval->add_option("--gt", ev_gt, "GT depth PFM");
    eval->add_option("--sparse", ev_sparse, "sparse depth file for error-vs-distance");
    eval->add_option("--bin-width", ev_bin, "error-vs-distance bin width (px)");
    eval->add_option("--pred-cloud", ev_pc, "predicted cloud PLY");
    eval->add_option("--gt-cloud", ev_gc, "GT cloud PLY");
    eval->add_option("--threshold", ev_thresh, "cloud metric threshold (m)");
    eval->add_option("--out", ev_out, "metrics key-value output file");

    // rf
    auto* rf = app.add_subcommand("rf", "receptive field of a propagation configuration");
    int rf_scales = 4, rf_iters = 8, rf_dil = 2, rf_step = 1, rf_grid = 0;
    std::string rf_out;
    rf->add_option("--scales", rf_scales, "pyramid scales");
    rf->add_option("--iters", rf_iters, "iterations per scale");
    rf->add_option("--dilation", rf_dil, "coarsest dilation");
    rf->add_option("--dilation-step", rf_step, "dilation increment");
    rf->add_option("--grid", rf_grid, "finest grid size (0 = auto)");
    rf->add_option("--out", rf_out, "report key-value output file");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        apply_threads(threads);
        if (synth->parsed())
            return cmd_synth(sy_spec, sy_out, sy_density, sy_seed);
        if (sample->parsed())
            return cmd_sample(sa_gt, sa_color, sa_mode, sa_max, sa_seed, sa_thresh, sa_nms,
                              sa_out);
        if (complete->parsed()) {
            if (!co_config.empty()) {
                std::map<std::string, bool> given = {
                    {"scales", f_scales->count() > 0},     {"iters", f_iters->count() > 0},
                    {"dilation", f_dil->count() > 0},      {"dilation_step", f_step->count() > 0},
                    {"mode", f_mode->count() > 0},         {"sigma_color", f_sc->count() > 0},
                    {"sigma_normal", f_sn->count() > 0},   {"center_bias", f_cb->count() > 0},
                };
                apply_config_file(co_config, co, given);
            }
            return cmd_complete(co_color, co_normals, co_sparse, co_gt, co_out, co, co_aff);
        }
        if (fuse->parsed())
            return cmd_fuse(fu_cams, fu_depths, fu_thresh, fu_min_views, fu_out);
        if (eval->parsed())
            return cmd_eval(ev_pred, ev_gt, ev_sparse, ev_bin, ev_pc, ev_gc, ev_thresh, ev_out);
        if (rf->parsed())
            return cmd_rf(rf_scales, rf_iters, rf_dil, rf_step, rf_grid, rf_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace sdprop
