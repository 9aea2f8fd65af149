#include "risfl/flbench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "risfl/consensus.hpp"

namespace risfl {

std::string to_string(View v) {
    switch (v) {
        case View::kFront: return "front";
        case View::kSide: return "side";
        case View::kBack: return "back";
        case View::kVertical: return "vertical";
    }
    return "front";
}

std::string to_string(SharingMode m) {
    switch (m) {
        case SharingMode::kNone: return "none";
        case SharingMode::kStar: return "star";
        case SharingMode::kRevised: return "revised";
        case SharingMode::kInitial: return "initial";
        case SharingMode::kRing: return "ring";
    }
    return "none";
}

MultiViewDataset gen_multiview_dataset(std::uint64_t seed, int n_samples, int dim, int classes,
                                       double noise) {
    if (classes < 2 || dim < 1) throw std::invalid_argument("gen_multiview_dataset: bad sizes");
    if (n_samples <= 0 || n_samples % (classes * kViewCount) != 0)
        throw std::invalid_argument(
            "gen_multiview_dataset: n_samples must divide evenly across classes x views");
    if (noise < 0.0) throw std::invalid_argument("gen_multiview_dataset: noise must be >= 0");

    Rng rng(seed);
    Rng latent_rng = rng.stream(1);
    Rng map_rng = rng.stream(2);

    // Per-class latent vectors and per-view mixing maps.
    std::vector<std::vector<double>> latents(classes, std::vector<double>(dim));
    for (auto& z : latents)
        for (double& x : z) x = latent_rng.normal();
    std::vector<std::vector<double>> view_maps(kViewCount,
                                               std::vector<double>(static_cast<std::size_t>(dim) * dim));
    for (auto& a : view_maps) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
        for (double& x : a) x = scale * map_rng.normal();
    }

    MultiViewDataset ds;
    ds.feature_dim = dim;
    ds.classes = classes;
    ds.noise = noise;
    ds.views.resize(kViewCount);

    const int per_cell = n_samples / (classes * kViewCount);
    for (int v = 0; v < kViewCount; ++v) {
        Rng cell_rng = rng.stream(100 + v);
        std::vector<Sample> all;
        for (int c = 0; c < classes; ++c) {
            // mean_v,c = A_v z_c
            std::vector<double> mean(dim, 0.0);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    mean[i] += view_maps[v][static_cast<std::size_t>(i) * dim + j] * latents[c][j];
            for (int s = 0; s < per_cell; ++s) {
                Sample sample;
                sample.label = c;
                sample.features.resize(dim);
                for (int i = 0; i < dim; ++i)
                    sample.features[i] = mean[i] + noise * cell_rng.normal();
                all.push_back(std::move(sample));
            }
        }
        // Seeded shuffle, then 70/30 split.
        for (std::size_t k = all.size(); k > 1; --k)
            std::swap(all[k - 1], all[cell_rng.uniform_index(k)]);
        const std::size_t train_count = (all.size() * 7) / 10;
        SplitData split;
        split.train.assign(all.begin(), all.begin() + train_count);
        split.test.assign(all.begin() + train_count, all.end());
        ds.pooled_test.insert(ds.pooled_test.end(), split.test.begin(), split.test.end());
        ds.views[v] = std::move(split);
    }
    return ds;
}

std::vector<View> assign_views(int node_count) {
    if (node_count == 8) {
        return {View::kBack, View::kSide, View::kFront, View::kVertical,
                View::kBack, View::kSide, View::kFront, View::kVertical};
    }
    std::vector<View> out;
    out.reserve(node_count);
    for (int i = 0; i < node_count; ++i) out.push_back(static_cast<View>(i % kViewCount));
    return out;
}

LocalModel::LocalModel(int dim, int classes, int hidden, Rng& rng)
    : net({dim, hidden, classes}) {
    net.init(rng);
}

namespace {

// Softmax cross-entropy; fills dloss/dlogits.
double cross_entropy(const std::vector<double>& logits, int label, std::vector<double>& dlogits) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    dlogits.resize(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        dlogits[k] = std::exp(logits[k] - max_logit);
        sum += dlogits[k];
    }
    for (std::size_t k = 0; k < logits.size(); ++k) dlogits[k] /= sum;
    const double p = std::max(dlogits[label], 1e-300);
    dlogits[label] -= 1.0;
    return -std::log(p);
}

}  // namespace

double loss_and_gradient(const LocalModel& model, const std::vector<Sample>& batch,
                         std::vector<double>& grad) {
    grad.assign(model.net.parameter_count(), 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::vector<double> dlogits;
    for (const Sample& s : batch) {
        Mlp::Trace trace;
        const auto logits = model.net.forward_cached(s.features, trace);
        loss += inv * cross_entropy(logits, s.label, dlogits);
        for (double& d : dlogits) d *= inv;
        model.net.backward(trace, dlogits, grad);
    }
    return loss;
}

double local_train(LocalModel& model, const std::vector<Sample>& shard, int epochs,
                   const TrainSettings& settings, Rng& rng) {
    if (shard.empty()) throw std::invalid_argument("local_train: shard must be non-empty");
    double last_epoch_loss = 0.0;
    std::vector<std::size_t> order(shard.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t k = order.size(); k > 1; --k)
            std::swap(order[k - 1], order[rng.uniform_index(k)]);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += settings.batch_size) {
            std::vector<Sample> batch;
            for (std::size_t k = start; k < std::min(order.size(), start + settings.batch_size); ++k)
                batch.push_back(shard[order[k]]);
            epoch_loss += loss_and_gradient(model, batch, grad);
            model.net.gradient_step(grad, settings.lr);
            ++batches;
        }
        last_epoch_loss = epoch_loss / batches;
    }
    return last_epoch_loss;
}

double evaluate(const LocalModel& model, const std::vector<Sample>& testset) {
    if (testset.empty()) throw std::invalid_argument("evaluate: testset must be non-empty");
    int correct = 0;
    for (const Sample& s : testset) {
        const auto logits = model.net.forward(s.features);
        const int pred = static_cast<int>(
            std::max_element(logits.begin(), logits.end()) - logits.begin());
        if (pred == s.label) ++correct;
    }
    return static_cast<double>(correct) / testset.size();
}

namespace {

NodeStates to_states(const std::vector<LocalModel>& models) {
    NodeStates states;
    states.reserve(models.size());
    for (const auto& m : models) states.push_back(m.parameters());
    return states;
}

void from_states(std::vector<LocalModel>& models, const NodeStates& states) {
    for (std::size_t k = 0; k < models.size(); ++k) models[k].net.set_parameters(states[k]);
}

}  // namespace

std::vector<LocalModel> federated_round(std::vector<LocalModel> models, const Graph& g,
                                        SharingMode mode, double sharing_step) {
    if (mode == SharingMode::kNone) return models;
    if (mode == SharingMode::kStar) {
        std::vector<double> mean(models.front().parameters().size(), 0.0);
        for (const auto& m : models)
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += m.parameters()[k];
        for (double& x : mean) x /= static_cast<double>(models.size());
        for (auto& m : models) m.net.set_parameters(mean);
        return models;
    }
    const NodeStates next = consensus_round(to_states(models), g, sharing_step);
    from_states(models, next);
    return models;
}

std::vector<LocalModel> federated_round_delayed(std::vector<LocalModel> models,
                                                const std::vector<std::vector<double>>& stale_params,
                                                const Graph& g, double sharing_step) {
    if (stale_params.size() != models.size())
        throw std::invalid_argument("federated_round_delayed: stale snapshot size mismatch");
    const int n = g.node_count();
    for (int u = 0; u < n; ++u) {
        auto& params = models[u].parameters();
        for (int v : g.neighbors(u))
            for (std::size_t c = 0; c < params.size(); ++c)
                params[c] += sharing_step * (stale_params[v][c] - stale_params[u][c]);
    }
    return models;
}

Graph fl_topology(SharingMode mode) {
    switch (mode) {
        case SharingMode::kRevised: return Graph::fig3b_revised();
        case SharingMode::kInitial: return Graph::fig3a_initial();
        case SharingMode::kRing: return Graph::cycle(8);
        case SharingMode::kStar: return Graph::star(8);
        case SharingMode::kNone: return Graph(8);
    }
    return Graph(8);
}

std::string FlResult::to_csv(const std::string& mode_label) const {
    std::ostringstream out;
    out.precision(17);
    out << "round,node,mode,accuracy\n";
    for (const auto& p : curve)
        out << p.round << "," << p.node << "," << mode_label << "," << p.accuracy << "\n";
    return out.str();
}

FlResult run_fl_experiment(const FlExperimentConfig& cfg) {
    constexpr int kNodes = 8;
    const Graph g = fl_topology(cfg.mode);
    const MultiViewDataset ds =
        gen_multiview_dataset(cfg.seed, cfg.n_samples, cfg.feature_dim, cfg.classes, cfg.noise);
    const auto views = assign_views(kNodes);

    Rng rng(cfg.seed);
    Rng init_rng = rng.stream(10);
    std::vector<LocalModel> models;
    for (int u = 0; u < kNodes; ++u)
        models.emplace_back(cfg.feature_dim, cfg.classes, cfg.hidden, init_rng);

    const double step =
        cfg.mode == SharingMode::kNone || cfg.mode == SharingMode::kStar
            ? 0.0
            : (cfg.sharing_step > 0.0 ? cfg.sharing_step : 1.0 / (g.max_degree() + 1.0));

    // Parameter history for staleness; snapshot index r holds the parameters
    // as they stood just before sharing round r.
    std::vector<std::vector<std::vector<double>>> history;

    FlResult result;
    std::vector<Rng> node_rngs;
    for (int u = 0; u < kNodes; ++u) node_rngs.push_back(rng.stream(1000 + u));

    for (int round = 0; round < cfg.rounds; ++round) {
        for (int u = 0; u < kNodes; ++u) {
            const auto& shard = ds.view(views[u]).train;
            local_train(models[u], shard, cfg.epochs_per_round, cfg.train, node_rngs[u]);
        }
        history.push_back({});
        for (const auto& m : models) history.back().push_back(m.parameters());

        if (cfg.mode != SharingMode::kNone) {
            if (cfg.staleness > 0 && cfg.mode != SharingMode::kStar) {
                const int stale_round = std::max(0, round - cfg.staleness);
                models = federated_round_delayed(std::move(models), history[stale_round], g, step);
            } else {
                models = federated_round(std::move(models), g, cfg.mode, step);
            }
        }

        for (int u = 0; u < kNodes; ++u)
            result.curve.push_back({round, u, evaluate(models[u], ds.pooled_test)});
    }

    double mean = 0.0;
    for (int u = 0; u < kNodes; ++u) mean += result.curve[result.curve.size() - kNodes + u].accuracy;
    result.final_mean_accuracy = mean / kNodes;
    return result;
}

}  // namespace risfl
