#include "meshboost/shape/refine.hpp"

#include <cmath>

#include "meshboost/core/rng.hpp"
#include "meshboost/metrics/chamfer.hpp"
#include "meshboost/shape/shape_nn.hpp"
#include "meshboost/spatial/point_index.hpp"

namespace meshboost {

using nn::Tensor;

namespace {

struct ObjectiveEval {
    double value;
    Tensor grad_positions; // d(objective)/d(decoded vertex positions), [n_v,3]
};

// Chamfer objective on fixed surface samples of the decoded template. The
// nearest-neighbor assignment is held fixed for the gradient (standard
// subgradient); sample positions are barycentric in the decoded vertices so
// the gradient scatters through the fixed weights.
ObjectiveEval evaluate(const Eigen::Matrix<double, Eigen::Dynamic, 3>& partial_pts,
                       const std::vector<SurfaceSample>& locations, const Mesh& templ,
                       const Tensor& positions, RefineObjective objective, bool want_grad) {
    const int nv = templ.num_vertices();
    Eigen::Matrix<double, Eigen::Dynamic, 3> verts(nv, 3);
    for (int i = 0; i < nv; ++i)
        for (int k = 0; k < 3; ++k) verts(i, k) = static_cast<double>(positions.at2(i, k));

    PointSet decoded = surface_sample_positions(verts, templ.faces, locations);
    const int ns = decoded.size();
    const int np = static_cast<int>(partial_pts.rows());

    Eigen::Matrix<double, Eigen::Dynamic, 3> sample_grad =
        Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(ns, 3);

    const PointIndex decoded_index(decoded.points);
    double value = 0.0;
    {
        // partial -> decoded term
        std::vector<NearestHit> hits(np);
        for (int i = 0; i < np; ++i) hits[i] = decoded_index.nearest(partial_pts.row(i).transpose());
        double sum = 0.0;
        for (int i = 0; i < np; ++i) sum += hits[i].squared_dist;
        value += sum / np;
        if (want_grad)
            for (int i = 0; i < np; ++i) {
                const int j = hits[i].id;
                sample_grad.row(j) +=
                    2.0 / np * (decoded.points.row(j) - partial_pts.row(i));
            }
    }
    if (objective == RefineObjective::Symmetric) {
        const PointIndex partial_index(partial_pts);
        double sum = 0.0;
        for (int j = 0; j < ns; ++j) {
            const NearestHit hit = partial_index.nearest(decoded.points.row(j).transpose());
            sum += hit.squared_dist;
            if (want_grad)
                sample_grad.row(j) +=
                    2.0 / ns * (decoded.points.row(j) - partial_pts.row(hit.id));
        }
        value += sum / ns;
    }

    ObjectiveEval out;
    out.value = value;
    if (want_grad) {
        out.grad_positions = Tensor({nv, 3});
        for (int j = 0; j < ns; ++j) {
            const SurfaceSample& s = locations[static_cast<std::size_t>(j)];
            const double w[3] = {s.b0, s.b1, s.b2};
            for (int k = 0; k < 3; ++k) {
                const int v = templ.faces(s.face, k);
                for (int c = 0; c < 3; ++c)
                    out.grad_positions.at2(v, c) += static_cast<float>(w[k] * sample_grad(j, c));
            }
        }
    }
    return out;
}

} // namespace

RefineProbe refine_objective(const ShapeModel& model, const Mesh& partial, const LatentCode& z,
                             const RefineConfig& cfg, bool want_grad) {
    cfg.validate();
    const Mesh& templ = (cfg.use_hires_template && model.template_hires) ? *model.template_hires
                                                                         : model.template_mesh;
    const PointSet partial_ps = sample_surface(partial, cfg.partial_samples, cfg.seed);
    const auto locations = sample_surface_locations(templ, cfg.decoded_samples, cfg.seed ^ 0xa5a5a5a5ull);
    DecoderCache cache;
    const Tensor positions = decode_positions_cached(model, z, templ, want_grad ? &cache : nullptr);
    const ObjectiveEval eval =
        evaluate(partial_ps.points, locations, templ, positions, cfg.objective, want_grad);
    RefineProbe probe;
    probe.value = eval.value;
    if (want_grad) probe.grad_z = decoder_backward(model, cache, eval.grad_positions, nullptr);
    return probe;
}

RefineResult refine_latent(const ShapeModel& model, const Mesh& partial, const LatentCode& z0,
                           const RefineConfig& cfg) {
    cfg.validate();
    const Mesh& templ = (cfg.use_hires_template && model.template_hires) ? *model.template_hires
                                                                         : model.template_mesh;
    const PointSet partial_ps = sample_surface(partial, cfg.partial_samples, cfg.seed);
    const auto locations = sample_surface_locations(templ, cfg.decoded_samples, cfg.seed ^ 0xa5a5a5a5ull);

    LatentCode z = z0;
    Tensor velocity({model.desc.n_z});

    const auto eval_at = [&](const LatentCode& code, DecoderCache* cache, bool want_grad) {
        const Tensor positions = decode_positions_cached(model, code, templ, cache);
        return evaluate(partial_ps.points, locations, templ, positions, cfg.objective, want_grad);
    };

    RefineResult result;
    LatentCode best = z0;
    double best_value = eval_at(z0, nullptr, false).value;
    if (!std::isfinite(best_value))
        throw NumericalError("refine_latent: non-finite objective at the initial code");
    result.initial_objective = best_value;

    Rng rng(cfg.seed ^ 0x5117ull);
    double sigma = 0.05; // random-search step scale
    int stall = 0;

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        ++result.iterations_run;
        if (cfg.gradient_free) {
            LatentCode candidate = best;
            for (auto& v : candidate.z.data) v += static_cast<float>(rng.normal() * sigma);
            const double value = eval_at(candidate, nullptr, false).value;
            if (!std::isfinite(value)) throw NumericalError("refine_latent: non-finite objective");
            if (value < best_value - cfg.tolerance * std::abs(best_value)) {
                best_value = value;
                best = candidate;
                stall = 0;
            } else if (++stall >= 10) {
                sigma *= 0.5;
                stall = 0;
                if (sigma < 1e-6) break;
            }
            continue;
        }

        DecoderCache cache;
        const ObjectiveEval eval = eval_at(z, &cache, true);
        if (!std::isfinite(eval.value))
            throw NumericalError("refine_latent: non-finite objective at iteration " +
                                 std::to_string(iter));
        if (eval.value < best_value * (1.0 - cfg.tolerance)) {
            stall = 0;
        } else if (cfg.tolerance > 0.0 && ++stall >= cfg.patience) {
            break;
        }
        if (eval.value < best_value) {
            best_value = eval.value;
            best = z;
        }

        const Tensor gz = decoder_backward(model, cache, eval.grad_positions, nullptr);
        for (std::size_t k = 0; k < velocity.data.size(); ++k) {
            velocity.data[k] =
                static_cast<float>(cfg.momentum * velocity.data[k] + gz.data[k]);
            z.z.data[k] -= static_cast<float>(cfg.learning_rate * velocity.data[k]);
        }
    }
    // The loop never evaluates the final update; one last check keeps the
    // best-iterate rule exact.
    if (!cfg.gradient_free) {
        const double last = eval_at(z, nullptr, false).value;
        if (std::isfinite(last) && last < best_value) {
            best_value = last;
            best = z;
        }
    }

    result.final_objective = best_value;
    result.code = best;
    result.mesh = decode(model, best);
    return result;
}

} // namespace meshboost
