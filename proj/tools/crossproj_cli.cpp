// crossproj: batch frontend over the projection library. Every stage reads
// and writes files, so pipelines can be inspected and diffed step by step.
//
// Exit codes: 0 ok, 1 usage, 2 unreadable or malformed input, 3 validation.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crossproj/crossproj.hpp"

namespace cp = crossproj;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// "HxW" -> (height, width).
std::pair<int, int> parse_size(const std::string& text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) throw UsageError("size must look like HxW, got '" + text + "'");
    const auto h = cp::io::detail::parse_number<int>(std::string_view(text).substr(0, x));
    const auto w = cp::io::detail::parse_number<int>(std::string_view(text).substr(x + 1));
    if (!h || !w || *h <= 0 || *w <= 0) throw UsageError("size must be two positive integers HxW, got '" + text + "'");
    return {*h, *w};
}

cp::Vec3 parse_triplet(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto x = cp::io::detail::parse_number<double>(part);
        if (!x) throw UsageError("expected x,y,z reals, got '" + text + "'");
        v.push_back(*x);
    }
    if (v.size() != 3) throw UsageError("expected x,y,z reals, got '" + text + "'");
    return {v[0], v[1], v[2]};
}

cp::LinkConfig parse_delta(const std::string& text) {
    if (text == "auto") return {};
    const auto d = cp::io::detail::parse_number<double>(text);
    if (!d || !(*d > 0.0)) throw UsageError("--delta must be a positive number of meters or 'auto'");
    return cp::LinkConfig{*d};
}

cp::Camera load_camera(const std::string& intrinsics, const std::string& pose, int width, int height) {
    return cp::Camera(cp::io::read_intrinsics(intrinsics, width, height), cp::io::read_pose(pose));
}

void print_grid_summary(const cp::SparseVoxelGrid& grid) {
    std::cout << "N=" << grid.size() << "\n"
              << "C=" << grid.channels() << "\n"
              << "voxel_size=" << grid.voxel_size() << "\n";
    if (grid.empty()) return;
    cp::VoxelCoord lo = grid.coords().front();
    cp::VoxelCoord hi = lo;
    for (const auto& c : grid.coords()) {
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], c[k]);
            hi[k] = std::max(hi[k], c[k]);
        }
    }
    const cp::Vec3 wmin = grid.origin() + grid.voxel_size() * cp::Vec3(lo[0], lo[1], lo[2]);
    const cp::Vec3 wmax = grid.origin() + grid.voxel_size() * cp::Vec3(hi[0] + 1.0, hi[1] + 1.0, hi[2] + 1.0);
    std::cout << "bounds_min=" << wmin.x() << "," << wmin.y() << "," << wmin.z() << "\n"
              << "bounds_max=" << wmax.x() << "," << wmax.y() << "," << wmax.z() << "\n";
}

std::string frame_name(const char* stem, std::size_t i, const char* ext) {
    std::ostringstream s;
    s << stem << '_' << std::setw(4) << std::setfill('0') << i << ext;
    return s.str();
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---------------------------------------------------------------------------

struct VoxelizeArgs {
    std::string in, out, origin;
    double voxel_size = 0.0;
};

int run_voxelize(const VoxelizeArgs& a) {
    std::vector<std::string> warnings;
    const cp::PointCloud cloud = cp::io::read_ply(a.in, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const cp::Vec3 origin = a.origin.empty() ? cp::Vec3::Zero() : parse_triplet(a.origin);
    const cp::SparseVoxelGrid grid = cp::voxelize(cloud, a.voxel_size, origin);
    cp::io::write_bpv(a.out, grid);
    std::cout << "points=" << cloud.size() << "\n";
    print_grid_summary(grid);
    return 0;
}

struct LinkArgs {
    std::string grid, pose, intrinsics, depth, out, delta = "auto";
    bool stats = false;
};

int run_link(const LinkArgs& a) {
    const cp::LinkConfig config = parse_delta(a.delta);
    const cp::SparseVoxelGrid grid = cp::io::read_bpv(a.grid);
    const cp::DepthMap depth = cp::io::read_pgm16(a.depth);
    const cp::Camera camera = load_camera(a.intrinsics, a.pose, depth.width, depth.height);
    cp::LinkStats stats;
    const cp::LinkMatrix link = cp::build_link(grid, camera, depth, config, &stats);
    cp::io::write_bpl(a.out, link);
    if (a.stats) {
        std::cout << "delta=" << config.resolve(grid) << "\n"
                  << "voxels=" << grid.size() << "\n"
                  << "visible=" << stats.visible << "\n"
                  << "occluded=" << stats.occluded << "\n"
                  << "out_of_frustum=" << stats.out_of_frustum << "\n"
                  << "no_depth=" << stats.no_depth << "\n";
    }
    return 0;
}

struct ProjectArgs {
    std::string grid, link, pose, intrinsics, depth, features, out;
};

int run_project_3d_to_2d(const ProjectArgs& a) {
    const cp::SparseVoxelGrid grid = cp::io::read_bpv(a.grid);
    const cp::LinkMatrix link = cp::io::read_bpl(a.link);
    const cp::DepthMap depth = cp::io::read_pgm16(a.depth);
    const cp::Camera camera = load_camera(a.intrinsics, a.pose, depth.width, depth.height);
    const cp::FeatureSet3D features =
        a.features.empty() ? grid.features() : cp::io::to_feature_set(cp::io::read_bpf(a.features));
    const cp::FeatureMap2D image = cp::scatter_3d_to_2d(features, link, depth, grid, camera);
    cp::io::write_bpf(a.out, cp::io::to_tensor(image));
    std::cout << "height=" << image.height() << "\nwidth=" << image.width() << "\nchannels=" << image.channels()
              << "\nvisible=" << link.visible_count() << "\n";
    return 0;
}

int run_project_2d_to_3d(const ProjectArgs& a) {
    const cp::LinkMatrix link = cp::io::read_bpl(a.link);
    const cp::FeatureMap2D image = cp::io::to_feature_map(cp::io::read_bpf(a.features));
    const cp::FeatureSet3D features = cp::gather_2d_to_3d(image, link);
    cp::io::write_bpf(a.out, cp::io::to_tensor(features));
    std::cout << "N=" << features.n() << "\nchannels=" << features.channels()
              << "\nvisible=" << link.visible_count() << "\n";
    return 0;
}

struct FuseArgs {
    std::vector<std::string> inputs, links;
    std::string policy = "uniform", weights, out;
};

int run_fuse(const FuseArgs& a) {
    if (a.inputs.size() != a.links.size()) throw UsageError("fuse: give one --link per --in");
    std::vector<cp::FeatureSet3D> views;
    std::vector<std::vector<std::uint8_t>> validity;
    for (std::size_t r = 0; r < a.inputs.size(); ++r) {
        views.push_back(cp::io::to_feature_set(cp::io::read_bpf(a.inputs[r])));
        validity.push_back(cp::io::read_bpl(a.links[r]).mask());
    }
    cp::FusionPolicy policy;
    if (a.policy == "uniform") {
        policy = cp::UniformFusion{};
    } else if (a.policy == "max") {
        policy = cp::MaxFusion{};
    } else {
        if (a.weights.empty()) throw UsageError("fuse: --policy weights needs --weights <bpf>");
        const cp::io::Tensor t = cp::io::read_bpf(a.weights);
        if (t.dims.size() != 2) throw cp::ValidationError("fuse: weights must have shape [R, N]");
        cp::FusionWeights w;
        w.per_view.resize(t.dims[0]);
        for (std::size_t r = 0; r < t.dims[0]; ++r) {
            w.per_view[r].assign(t.data.begin() + static_cast<std::ptrdiff_t>(r * t.dims[1]),
                                 t.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.dims[1]));
        }
        policy = std::move(w);
    }
    const cp::FeatureSet3D fused = cp::fuse_views(views, validity, policy);
    cp::io::write_bpf(a.out, cp::io::to_tensor(fused));
    std::cout << "views=" << views.size() << "\nN=" << fused.n() << "\nchannels=" << fused.channels() << "\n";
    return 0;
}

struct PaintArgs {
    std::string grid, link, pose, intrinsics, depth, labels, out;
};

int run_paint_3d_to_2d(const PaintArgs& a) {
    const cp::SparseVoxelGrid grid = cp::io::read_bpv(a.grid);
    if (!grid.has_labels()) throw cp::ValidationError("paint-labels: grid " + a.grid + " carries no labels");
    const cp::LinkMatrix link = cp::io::read_bpl(a.link);
    const cp::DepthMap depth = cp::io::read_pgm16(a.depth);
    const cp::Camera camera = load_camera(a.intrinsics, a.pose, depth.width, depth.height);
    const cp::LabelImage image = cp::paint_labels_3d_to_2d(grid.labels(), link, depth, grid, camera);
    cp::io::write_label_pgm(a.out, image);
    const auto painted = std::count_if(image.values.begin(), image.values.end(),
                                       [](cp::Label l) { return l != cp::kVoidLabel; });
    std::cout << "painted_pixels=" << painted << "\n";
    return 0;
}

int run_paint_2d_to_3d(const PaintArgs& a) {
    const cp::SparseVoxelGrid grid = cp::io::read_bpv(a.grid);
    const cp::LinkMatrix link = cp::io::read_bpl(a.link);
    if (link.size() != grid.size()) throw cp::ValidationError("paint-labels: link rows differ from grid voxels");
    const cp::LabelImage image = cp::io::read_label_pgm(a.labels);
    std::vector<cp::Label> labels = cp::paint_labels_2d_to_3d(image, link);
    const auto painted = std::count_if(labels.begin(), labels.end(), [](cp::Label l) { return l != cp::kVoidLabel; });
    cp::io::write_bpv(a.out, grid.with_labels(std::move(labels)));
    std::cout << "labeled_voxels=" << painted << "\n";
    return 0;
}

struct RemapArgs {
    std::string link, out;
    int ratio = 1, width = 0, height = 0;
};

int run_remap(const RemapArgs& a) {
    const cp::LinkMatrix link = cp::io::read_bpl(a.link);
    if (a.ratio < 1) throw UsageError("--ratio must be a positive integer");
    const int w = a.width > 0 ? a.width : cp::downsampled_size(link.width, a.ratio);
    const int h = a.height > 0 ? a.height : cp::downsampled_size(link.height, a.ratio);
    const cp::LinkMatrix out = cp::remap_link(link, a.ratio, w, h);
    cp::io::write_bpl(a.out, out);
    std::cout << "width=" << w << "\nheight=" << h << "\n";
    return 0;
}

struct RenderArgs {
    std::string grid, pose, intrinsics, size, out;
};

int run_render_depth(const RenderArgs& a) {
    const auto [h, w] = parse_size(a.size);
    const cp::SparseVoxelGrid grid = cp::io::read_bpv(a.grid);
    const cp::Camera camera = load_camera(a.intrinsics, a.pose, w, h);
    const cp::DepthMap depth = cp::render_depth(grid, camera);
    cp::io::write_pgm16(a.out, depth);
    const auto valid = std::count_if(depth.values.begin(), depth.values.end(), [](double d) { return d > 0.0; });
    std::cout << "valid_pixels=" << valid << "\n";
    return 0;
}

struct SynthArgs {
    std::string scene, out_dir, size = "480x640";
    std::size_t views = 3;
    std::uint64_t seed = 0;
    double fx = 525.0;
    double voxel_size = 0.0;
};

int run_synth(const SynthArgs& a) {
    const auto [h, w] = parse_size(a.size);
    const cp::BoxScene scene = cp::io::read_scene(a.scene);
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);

    const cp::PointCloud cloud = cp::sample_cloud(scene, a.seed);
    cp::io::write_ply((dir / "cloud.ply").string(), cloud);
    if (a.voxel_size > 0.0) cp::io::write_bpv((dir / "grid.bpv").string(), cp::voxelize(cloud, a.voxel_size));

    const cp::Intrinsics intr{a.fx, a.fx, (w - 1) / 2.0, (h - 1) / 2.0, w, h};
    cp::io::write_intrinsics((dir / "intrinsics.txt").string(), intr);
    cp::io::Manifest manifest;
    manifest.intrinsics_path = "intrinsics.txt";
    const auto cameras = cp::orbit_cameras(scene, a.views, intr);
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        const cp::AnalyticRender r = cp::analytic_render(scene, cameras[i]);
        cp::io::ManifestEntry e{static_cast<std::int64_t>(i), frame_name("color", i, ".bpf"),
                                frame_name("depth", i, ".pgm"), frame_name("pose", i, ".txt")};
        cp::io::write_bpf((dir / e.color_path).string(), cp::io::to_tensor(r.color));
        cp::io::write_pgm16((dir / e.depth_path).string(), r.depth);
        cp::io::write_label_pgm((dir / frame_name("labels", i, ".pgm")).string(), r.labels);
        cp::io::write_pose((dir / e.pose_path).string(), cameras[i].pose());
        manifest.entries.push_back(e);
    }
    cp::io::write_manifest((dir / "manifest.txt").string(), manifest);
    std::cout << "points=" << cloud.size() << "\nviews=" << cameras.size() << "\n";
    return 0;
}

struct SelectArgs {
    std::string manifest, mode = "test";
    std::size_t n = cp::kDefaultViewCount;
    std::uint64_t seed = 0;
};

int run_select_views(const SelectArgs& a) {
    const cp::io::Manifest m = cp::io::read_manifest(a.manifest);
    const std::vector<std::size_t> picked = a.mode == "train"
                                                ? cp::sample_view_indices(m.entries.size(), a.n, a.seed)
                                                : cp::central_view_indices(m.entries.size(), a.n);
    std::cout << "frames=";
    for (std::size_t k = 0; k < picked.size(); ++k) {
        std::cout << (k ? "," : "") << m.entries[picked[k]].frame_index;
    }
    std::cout << "\n";
    return 0;
}

struct BenchArgs {
    long long voxels = 0;
    std::string size = "480x640";
    long long channels = 32;
    int iterations = 10;
    std::uint64_t seed = 1;
};

int run_bench(const BenchArgs& a, std::size_t threads) {
    const auto [h, w] = parse_size(a.size);
    if (a.voxels < 0 || a.channels < 0 || a.iterations < 1) throw UsageError("bench: sizes must be non-negative");
    const auto n = static_cast<std::size_t>(a.voxels);
    const auto c = static_cast<std::size_t>(a.channels);

    const cp::BenchScene scene = cp::make_bench_scene(n, w, h, c, a.seed);
    const cp::SparseVoxelGrid& grid = scene.grid;
    const cp::Camera& camera = scene.camera;
    const cp::DepthMap& depth = scene.depth;
    const cp::FeatureMap2D& image = scene.image;

    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::duration d) { return std::chrono::duration<double>(d).count(); };
    std::vector<double> t_link, t_scatter, t_gather, t_total;
    std::size_t visible = 0;
    for (int it = 0; it < a.iterations + 1; ++it) {  // first pass warms caches
        const auto t0 = clock::now();
        const cp::LinkMatrix link = cp::build_link(grid, camera, depth);
        const auto t1 = clock::now();
        const cp::FeatureMap2D scattered = cp::scatter_3d_to_2d(grid.features(), link, depth, grid, camera);
        const auto t2 = clock::now();
        const cp::FeatureSet3D gathered = cp::gather_2d_to_3d(image, link);
        const auto t3 = clock::now();
        visible = link.visible_count();
        if (it == 0) continue;
        t_link.push_back(seconds(t1 - t0));
        t_scatter.push_back(seconds(t2 - t1));
        t_gather.push_back(seconds(t3 - t2));
        t_total.push_back(seconds(t3 - t0));
        (void)scattered;
        (void)gathered;
    }
    const double total = median(t_total);
    std::cout << "voxels=" << n << "\n"
              << "height=" << h << "\n"
              << "width=" << w << "\n"
              << "channels=" << c << "\n"
              << "threads=" << (threads ? std::to_string(threads) : std::string("auto")) << "\n"
              << "iterations=" << a.iterations << "\n"
              << "visible=" << visible << "\n"
              << "build_link_median_s=" << median(t_link) << "\n"
              << "scatter_median_s=" << median(t_scatter) << "\n"
              << "gather_median_s=" << median(t_gather) << "\n"
              << "total_median_s=" << total << "\n"
              << "voxels_per_second=" << (n > 0 && total > 0.0 ? static_cast<double>(n) / total : 0.0) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crossproj: 2D/3D cross-dimension projection tools"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cp::version()));
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (default: CROSSPROJ_THREADS or all cores)");

    VoxelizeArgs vox;
    auto* c_vox = app.add_subcommand("voxelize", "Voxelize an ASCII PLY point cloud");
    c_vox->add_option("--in", vox.in, "Input PLY")->required();
    c_vox->add_option("--voxel-size", vox.voxel_size, "Voxel edge in meters (0.02 and 0.05 are typical)")->required();
    c_vox->add_option("--origin", vox.origin, "Grid origin x,y,z (default 0,0,0)");
    c_vox->add_option("--out", vox.out, "Output BPV")->required();

    LinkArgs lnk;
    auto* c_link = app.add_subcommand("link", "Build the voxel-to-pixel link matrix for one view");
    c_link->add_option("--grid", lnk.grid, "Input BPV")->required();
    c_link->add_option("--pose", lnk.pose, "Camera-to-world pose (4x4 text)")->required();
    c_link->add_option("--intrinsics", lnk.intrinsics, "Intrinsics (3x3 text)")->required();
    c_link->add_option("--depth", lnk.depth, "Depth map (16-bit PGM, millimeters)")->required();
    c_link->add_option("--delta", lnk.delta, "Depth tolerance in meters, or 'auto' for the voxel size");
    c_link->add_option("--out", lnk.out, "Output BPL")->required();
    c_link->add_flag("--stats", lnk.stats, "Print visible / occluded / out-of-frustum counts");

    ProjectArgs prj;
    auto* c_proj = app.add_subcommand("project", "Move features between voxels and pixels");
    c_proj->require_subcommand(1);
    auto* c_p32 = c_proj->add_subcommand("3d-to-2d", "Scatter voxel features into an image");
    c_p32->add_option("--grid", prj.grid, "Input BPV")->required();
    c_p32->add_option("--link", prj.link, "Input BPL")->required();
    c_p32->add_option("--pose", prj.pose, "Camera-to-world pose")->required();
    c_p32->add_option("--intrinsics", prj.intrinsics, "Intrinsics")->required();
    c_p32->add_option("--depth", prj.depth, "Depth map PGM")->required();
    c_p32->add_option("--features", prj.features, "Voxel features BPF [N, C] (default: grid features)");
    c_p32->add_option("--out", prj.out, "Output BPF [H, W, C]")->required();
    auto* c_p23 = c_proj->add_subcommand("2d-to-3d", "Gather image features into voxels");
    c_p23->add_option("--features", prj.features, "Image features BPF [H, W, C]")->required();
    c_p23->add_option("--link", prj.link, "Input BPL")->required();
    c_p23->add_option("--out", prj.out, "Output BPF [N, C]")->required();

    FuseArgs fus;
    auto* c_fuse = app.add_subcommand("fuse", "Fuse back-projected features of several views");
    c_fuse->add_option("--policy", fus.policy, "uniform | max | weights")
        ->check(CLI::IsMember({"uniform", "max", "weights"}));
    c_fuse->add_option("--weights", fus.weights, "Weights BPF [R, N] for --policy weights");
    c_fuse->add_option("--in", fus.inputs, "Per-view features BPF [N, C] (repeat)")->required();
    c_fuse->add_option("--link", fus.links, "Per-view BPL supplying validity masks (repeat, same order)")->required();
    c_fuse->add_option("--out", fus.out, "Output BPF [N, C]")->required();

    PaintArgs pnt;
    auto* c_paint = app.add_subcommand("paint-labels", "Transfer semantic labels between voxels and pixels");
    c_paint->require_subcommand(1);
    auto* c_l32 = c_paint->add_subcommand("3d-to-2d", "Paint voxel labels into a label image");
    c_l32->add_option("--grid", pnt.grid, "Labeled BPV")->required();
    c_l32->add_option("--link", pnt.link, "Input BPL")->required();
    c_l32->add_option("--pose", pnt.pose, "Camera-to-world pose")->required();
    c_l32->add_option("--intrinsics", pnt.intrinsics, "Intrinsics")->required();
    c_l32->add_option("--depth", pnt.depth, "Depth map PGM")->required();
    c_l32->add_option("--out", pnt.out, "Output label PGM (65535 = void)")->required();
    auto* c_l23 = c_paint->add_subcommand("2d-to-3d", "Back-project a label image onto voxels");
    c_l23->add_option("--labels", pnt.labels, "Label PGM")->required();
    c_l23->add_option("--link", pnt.link, "Input BPL")->required();
    c_l23->add_option("--grid", pnt.grid, "Grid BPV whose labels are replaced")->required();
    c_l23->add_option("--out", pnt.out, "Output BPV")->required();

    RemapArgs rmp;
    auto* c_remap = app.add_subcommand("remap", "Remap link coordinates to a downsampled level");
    c_remap->add_option("--link", rmp.link, "Input BPL")->required();
    c_remap->add_option("--ratio", rmp.ratio, "Downsampling ratio")->required();
    c_remap->add_option("--width", rmp.width, "Target width (default ceil(width / ratio))");
    c_remap->add_option("--height", rmp.height, "Target height (default ceil(height / ratio))");
    c_remap->add_option("--out", rmp.out, "Output BPL")->required();

    RenderArgs rnd;
    auto* c_render = app.add_subcommand("render-depth", "Point-splat z-buffer depth of a voxel grid");
    c_render->add_option("--grid", rnd.grid, "Input BPV")->required();
    c_render->add_option("--pose", rnd.pose, "Camera-to-world pose")->required();
    c_render->add_option("--intrinsics", rnd.intrinsics, "Intrinsics")->required();
    c_render->add_option("--size", rnd.size, "Image size HxW")->required();
    c_render->add_option("--out", rnd.out, "Output depth PGM")->required();

    SynthArgs syn;
    auto* c_synth = app.add_subcommand("synth", "Render a synthetic box scene from orbiting cameras");
    c_synth->add_option("--scene", syn.scene, "Scene description")->required();
    c_synth->add_option("--views", syn.views, "Number of views")->required();
    c_synth->add_option("--out-dir", syn.out_dir, "Output directory")->required();
    c_synth->add_option("--seed", syn.seed, "Surface sampling seed");
    c_synth->add_option("--size", syn.size, "Image size HxW (default 480x640)");
    c_synth->add_option("--fx", syn.fx, "Focal length in pixels (fx = fy)");
    c_synth->add_option("--voxel-size", syn.voxel_size, "Also write grid.bpv at this voxel size");

    SelectArgs sel;
    auto* c_select = app.add_subcommand("select-views", "Choose views from a manifest");
    c_select->add_option("--manifest", sel.manifest, "Scene manifest")->required();
    c_select->add_option("--mode", sel.mode, "train (random) | test (central view per group)")
        ->check(CLI::IsMember({"train", "test"}))
        ->required();
    c_select->add_option("--n", sel.n, "Number of views (default 3)");
    c_select->add_option("--seed", sel.seed, "Seed for train mode");

    BenchArgs bch;
    auto* c_bench = app.add_subcommand("bench", "Time build_link, scatter and gather");
    c_bench->add_option("--voxels", bch.voxels, "Voxel count")->required();
    c_bench->add_option("--size", bch.size, "Image size HxW")->required();
    c_bench->add_option("--channels", bch.channels, "Feature channels")->required();
    c_bench->add_option("--iterations", bch.iterations, "Timed iterations (default 10)");
    c_bench->add_option("--seed", bch.seed, "Scene seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (threads == 0) threads = cp::threads_from_env();
    const cp::ThreadLimit limit(threads);

    try {
        if (*c_vox) return run_voxelize(vox);
        if (*c_link) return run_link(lnk);
        if (*c_p32) return run_project_3d_to_2d(prj);
        if (*c_p23) return run_project_2d_to_3d(prj);
        if (*c_fuse) return run_fuse(fus);
        if (*c_l32) return run_paint_3d_to_2d(pnt);
        if (*c_l23) return run_paint_2d_to_3d(pnt);
        if (*c_remap) return run_remap(rmp);
        if (*c_render) return run_render_depth(rnd);
        if (*c_synth) return run_synth(syn);
        if (*c_select) return run_select_views(sel);
        if (*c_bench) return run_bench(bch, threads);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const cp::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const cp::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitParse;
    } catch (const cp::Error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitUsage;
}
