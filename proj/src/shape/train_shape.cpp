#include "meshboost/shape/train_shape.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "meshboost/core/rng.hpp"
#include "meshboost/mesh/synthetic_body.hpp"
#include "meshboost/metrics/chamfer.hpp"
#include "meshboost/nn/optimizer.hpp"
#include "meshboost/nn/weights_io.hpp"
#include "meshboost/shape/shape_nn.hpp"

namespace meshboost {

using nn::Tensor;

namespace {

struct DatasetItem {
    Mesh mesh;
};

std::vector<DatasetItem> build_dataset(const ShapeTrainConfig& cfg) {
    std::vector<DatasetItem> items;
    items.reserve(cfg.num_shapes);
    for (int i = 0; i < cfg.num_shapes; ++i) {
        Rng rng(mix_seed(cfg.seed, 1, static_cast<std::uint64_t>(i)));
        Eigen::VectorXd pose(kBodyPoseParams), shape(kBodyShapeParams);
        for (int k = 0; k < kBodyPoseParams; ++k) pose[k] = rng.uniform(-cfg.pose_range, cfg.pose_range);
        for (int k = 0; k < kBodyShapeParams; ++k)
            shape[k] = rng.uniform(-cfg.shape_range, cfg.shape_range);
        items.push_back({generate_synthetic_body(pose, shape, cfg.template_resolution)});
    }
    return items;
}

// First k entries of a seeded permutation of [0, n).
std::vector<int> random_subset(Rng& rng, int n, int k) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

Tensor augmented_input(const ShapeTrainConfig& cfg, const Mesh& mesh, std::uint64_t sample_seed,
                       std::uint64_t augment_seed) {
    PointSet points = sample_surface(mesh, cfg.encoder_points, sample_seed);
    Rng rng(augment_seed);
    if (cfg.augment_subsample) {
        const double frac = rng.uniform(cfg.subsample_min_fraction, 1.0);
        const int keep = std::max(8, static_cast<int>(std::lround(frac * points.size())));
        if (keep < points.size()) {
            auto idx = random_subset(rng, points.size(), keep);
            std::sort(idx.begin(), idx.end());
            Eigen::Matrix<double, Eigen::Dynamic, 3> sub(keep, 3);
            for (int i = 0; i < keep; ++i) sub.row(i) = points.points.row(idx[static_cast<std::size_t>(i)]);
            points.points = std::move(sub);
        }
    }
    if (cfg.augment_shift) {
        const Vec3 shift(rng.normal() * cfg.shift_sigma, rng.normal() * cfg.shift_sigma,
                         rng.normal() * cfg.shift_sigma);
        points.points.rowwise() += shift.transpose();
        if (cfg.jitter_sigma > 0.0)
            for (int i = 0; i < points.size(); ++i)
                for (int k = 0; k < 3; ++k) points.points(i, k) += rng.normal() * cfg.jitter_sigma;
    }
    return points_to_tensor(points);
}

struct TrainState {
    ShapeModel model;
    nn::Optimizer optimizer;
    int next_epoch = 0;
    std::vector<EpochStats> history;
};

void write_checkpoint(const std::string& path, const TrainState& state) {
    nn::WeightFile wf;
    wf.descriptor = state.model.desc.to_json();
    wf.tensors = state.model.weights;
    for (const auto& [name, t] : state.optimizer.m) wf.tensors.emplace("opt.m." + name, t);
    for (const auto& [name, t] : state.optimizer.v) wf.tensors.emplace("opt.v." + name, t);
    Tensor meta({3});
    meta[0] = static_cast<float>(state.next_epoch);
    meta[1] = static_cast<float>(state.optimizer.step_count);
    meta[2] = 0.0f;
    wf.tensors.emplace("_meta.train_state", std::move(meta));
    Tensor hist({static_cast<int>(state.history.size()), 3});
    for (std::size_t i = 0; i < state.history.size(); ++i) {
        hist.at2(static_cast<int>(i), 0) = static_cast<float>(state.history[i].epoch);
        hist.at2(static_cast<int>(i), 1) = static_cast<float>(state.history[i].train_mse);
        hist.at2(static_cast<int>(i), 2) = static_cast<float>(state.history[i].val_mse);
    }
    wf.tensors.emplace("_meta.history", std::move(hist));
    nn::save_weights(path, wf);
}

TrainState read_checkpoint(const std::string& path, const ShapeTrainConfig& cfg) {
    nn::WeightFile wf = nn::load_weights(path, cfg.desc.to_json());
    TrainState state;
    state.model.desc = cfg.desc;
    state.model.template_mesh = body_template(cfg.template_resolution);
    state.optimizer = nn::Optimizer({nn::OptimMethod::Adam, cfg.learning_rate});
    const Tensor meta = wf.tensors.at("_meta.train_state");
    state.next_epoch = static_cast<int>(meta[0]);
    state.optimizer.step_count = static_cast<std::int64_t>(meta[1]);
    const Tensor hist = wf.tensors.at("_meta.history");
    for (int i = 0; i < hist.dim(0); ++i)
        state.history.push_back({static_cast<int>(hist.at2(i, 0)), hist.at2(i, 1), hist.at2(i, 2)});
    for (auto& [name, t] : wf.tensors) {
        if (name.rfind("opt.m.", 0) == 0)
            state.optimizer.m.emplace(name.substr(6), std::move(t));
        else if (name.rfind("opt.v.", 0) == 0)
            state.optimizer.v.emplace(name.substr(6), std::move(t));
        else if (name.rfind("_meta.", 0) != 0)
            state.model.weights.emplace(name, std::move(t));
    }
    return state;
}

double validation_mse(const ShapeModel& model, const std::vector<DatasetItem>& items,
                      const std::vector<int>& val_ids, const ShapeTrainConfig& cfg) {
    double total = 0.0;
    for (int id : val_ids) {
        const Mesh& mesh = items[static_cast<std::size_t>(id)].mesh;
        const Tensor input = points_to_tensor(
            sample_surface(mesh, cfg.encoder_points, mix_seed(cfg.seed, 7, static_cast<std::uint64_t>(id))));
        const LatentCode z = encode_cached(model, input, nullptr);
        const Tensor pred = decode_positions_cached(model, z, model.template_mesh, nullptr);
        double sum = 0.0;
        for (int i = 0; i < mesh.num_vertices(); ++i)
            for (int k = 0; k < 3; ++k) {
                const double d = static_cast<double>(pred.at2(i, k)) - mesh.vertices(i, k);
                sum += d * d;
            }
        total += sum / (mesh.num_vertices() * 3.0);
    }
    return total / val_ids.size();
}

ShapeTrainResult run_training(const ShapeTrainConfig& cfg, TrainState state) {
    cfg.validate();
    cfg.desc.validate();

    const std::vector<DatasetItem> items = build_dataset(cfg);
    const int val_count = std::max(1, static_cast<int>(std::lround(cfg.num_shapes * cfg.val_fraction)));
    const int train_count = cfg.num_shapes - val_count;
    if (train_count < 1) throw ValidationError("train_shape_model: no training shapes left");
    std::vector<int> train_ids(train_count), val_ids(val_count);
    std::iota(train_ids.begin(), train_ids.end(), 0);
    std::iota(val_ids.begin(), val_ids.end(), train_count);

    const Mesh& templ = state.model.template_mesh;
    const int nv = templ.num_vertices();
    const int dec_points = (cfg.decoder_points > 0 && cfg.decoder_points < nv) ? cfg.decoder_points : nv;

    std::ofstream csv;
    if (!cfg.log_csv_path.empty()) {
        csv.open(cfg.log_csv_path, state.next_epoch == 0 ? std::ios::trunc : std::ios::app);
        if (!csv) throw IoError("cannot open training log: " + cfg.log_csv_path);
        if (state.next_epoch == 0) csv << "epoch,train_mse,val_mse\n";
    }

    for (int epoch = state.next_epoch; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order = train_ids;
        Rng shuffle_rng(mix_seed(cfg.seed, 3, static_cast<std::uint64_t>(epoch)));
        for (int i = train_count - 1; i > 0; --i) {
            const int j = static_cast<int>(shuffle_rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }

        double epoch_loss = 0.0;
        for (int step = 0; step < train_count; ++step) {
            const int id = order[static_cast<std::size_t>(step)];
            const Mesh& mesh = items[static_cast<std::size_t>(id)].mesh;
            const std::uint64_t tag =
                static_cast<std::uint64_t>(epoch) * 1000003ull + static_cast<std::uint64_t>(id);

            const Tensor input = augmented_input(cfg, mesh, mix_seed(cfg.seed, 4, tag),
                                                 mix_seed(cfg.seed, 5, tag));

            // Supervise a seeded subset of template vertices.
            Mesh sub_templ;
            std::vector<int> vert_ids;
            if (dec_points < nv) {
                Rng rng(mix_seed(cfg.seed, 6, tag));
                vert_ids = random_subset(rng, nv, dec_points);
                sub_templ.vertices.resize(dec_points, 3);
                for (int i = 0; i < dec_points; ++i)
                    sub_templ.vertices.row(i) = templ.vertices.row(vert_ids[static_cast<std::size_t>(i)]);
                sub_templ.faces.resize(0, 3);
            }
            const Mesh& dec_templ = dec_points < nv ? sub_templ : templ;

            EncoderCache enc_cache;
            const LatentCode z = encode_cached(state.model, input, &enc_cache);
            DecoderCache dec_cache;
            const Tensor pred = decode_positions_cached(state.model, z, dec_templ, &dec_cache);

            const int rows = pred.dim(0);
            Tensor gpred({rows, 3});
            double loss = 0.0;
            for (int i = 0; i < rows; ++i) {
                const int target_row = dec_points < nv ? vert_ids[static_cast<std::size_t>(i)] : i;
                for (int k = 0; k < 3; ++k) {
                    const double d = static_cast<double>(pred.at2(i, k)) - mesh.vertices(target_row, k);
                    loss += d * d;
                    gpred.at2(i, k) = static_cast<float>(2.0 * d / (rows * 3.0));
                }
            }
            loss /= rows * 3.0;
            if (!std::isfinite(loss)) {
                if (!cfg.checkpoint_path.empty()) write_checkpoint(cfg.checkpoint_path, state);
                throw NumericalError("train_shape_model: divergence (non-finite loss) at epoch " +
                                     std::to_string(epoch) +
                                     (cfg.checkpoint_path.empty() ? ""
                                                                  : "; last checkpoint: " + cfg.checkpoint_path));
            }
            epoch_loss += loss;

            nn::NamedTensors<float> grads;
            const Tensor gz = decoder_backward(state.model, dec_cache, gpred, &grads);
            encoder_backward_to_weights(state.model, enc_cache, gz, grads);
            state.optimizer.step(state.model.weights, grads);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_mse = epoch_loss / train_count;
        stats.val_mse = validation_mse(state.model, items, val_ids, cfg);
        state.history.push_back(stats);
        if (csv.is_open()) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", stats.epoch, stats.train_mse, stats.val_mse);
            csv << buf;
        }
        state.next_epoch = epoch + 1;
        if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
            (epoch + 1) % cfg.checkpoint_every == 0)
            write_checkpoint(cfg.checkpoint_path, state);
    }

    // Reported accuracy: directed Chamfer from complete val inputs to their
    // reconstructions, with headroom for same-family fresh shapes.
    double worst = 0.0;
    for (int id : val_ids) {
        const Mesh& mesh = items[static_cast<std::size_t>(id)].mesh;
        const auto [recon, z] =
            complete_shape(state.model, mesh, {cfg.encoder_points, mix_seed(cfg.seed, 8, static_cast<std::uint64_t>(id))});
        const PointSet in_pts =
            sample_surface(mesh, 2048, mix_seed(cfg.seed, 9, static_cast<std::uint64_t>(id)));
        const PointSet out_pts =
            sample_surface(recon, 4096, mix_seed(cfg.seed, 10, static_cast<std::uint64_t>(id)));
        worst = std::max(worst, directed_chamfer(in_pts, out_pts));
    }
    state.model.tau_train = 1.5 * worst;

    ShapeTrainResult result;
    result.history = state.history;
    if (!state.history.empty()) {
        result.final_train_mse = state.history.back().train_mse;
        result.final_val_mse = state.history.back().val_mse;
    }
    result.model = std::move(state.model);
    return result;
}

} // namespace

ShapeTrainResult train_shape_model(const ShapeTrainConfig& cfg) {
    TrainState state;
    state.model.desc = cfg.desc;
    state.model.weights = init_shape_weights(cfg.desc, mix_seed(cfg.seed, 2));
    state.model.template_mesh = body_template(cfg.template_resolution);
    state.optimizer = nn::Optimizer({nn::OptimMethod::Adam, cfg.learning_rate});
    return run_training(cfg, std::move(state));
}

ShapeTrainResult train_shape_model_resume(const ShapeTrainConfig& cfg, const std::string& checkpoint_path) {
    return run_training(cfg, read_checkpoint(checkpoint_path, cfg));
}

} // namespace meshboost
