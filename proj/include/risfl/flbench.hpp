#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risfl/graph.hpp"
#include "risfl/nn.hpp"

namespace risfl {

enum class View { kFront = 0, kSide = 1, kBack = 2, kVertical = 3 };
constexpr int kViewCount = 4;

std::string to_string(View v);

struct Sample {
    std::vector<double> features;
    int label = 0;
};

struct SplitData {
    std::vector<Sample> train;
    std::vector<Sample> test;
};

// Synthetic multi-view classification task: a shared per-class latent vector
// is pushed through a fixed per-view linear map and jittered with Gaussian
// noise, so the views are informative but distinct. Stands in for the
// multi-view vehicle images at desk scale.
struct MultiViewDataset {
    int feature_dim = 0;
    int classes = 0;
    double noise = 0.0;
    std::vector<SplitData> views;   // indexed by View
    std::vector<Sample> pooled_test;  // all views' test splits

    const SplitData& view(View v) const { return views[static_cast<int>(v)]; }
};

// n_samples must divide evenly across classes x views; 70/30 train/test split
// per view, seeded and disjoint.
MultiViewDataset gen_multiview_dataset(std::uint64_t seed, int n_samples, int dim, int classes,
                                       double noise = 1.0);

// The 8-node view assignment used in the experiments (0-based node ids; the
// scenario's cars 1..8 map to nodes 0..7): nodes 1,5 -> side; 2,6 -> front;
// 3,7 -> vertical; 4,0 -> back. Other node counts fall back to round-robin.
std::vector<View> assign_views(int node_count);

// One hidden layer of 16 tanh units over the flat feature vector; parameter
// vectors are identical in shape across nodes so they can be consensus
// averaged.
struct LocalModel {
    Mlp net;

    LocalModel() = default;
    LocalModel(int dim, int classes, int hidden, Rng& rng);

    std::vector<double>& parameters() { return net.parameters(); }
    const std::vector<double>& parameters() const { return net.parameters(); }
};

struct TrainSettings {
    double lr = 0.005;
    int batch_size = 32;
};

// Mini-batch SGD on softmax cross-entropy. Returns the mean loss of the last
// epoch; epochs = 0 leaves the model untouched.
double local_train(LocalModel& model, const std::vector<Sample>& shard, int epochs,
                   const TrainSettings& settings, Rng& rng);

// Loss and gradient on one fixed batch; used by the finite-difference check.
double loss_and_gradient(const LocalModel& model, const std::vector<Sample>& batch,
                         std::vector<double>& grad);

double evaluate(const LocalModel& model, const std::vector<Sample>& testset);

enum class SharingMode { kNone, kStar, kRevised, kInitial, kRing };

// none -> identity; star -> every node gets the uniform average (central
// integrator); revised/initial/ring -> one consensus round over g with the
// given step.
std::vector<LocalModel> federated_round(std::vector<LocalModel> models, const Graph& g,
                                        SharingMode mode, double sharing_step);

// Delayed variant: the averaging direction is computed from a stale snapshot
// of every node's parameters (staleness in whole sharing rounds), mimicking
// the delayed arguments of the aggregation protocol at round granularity.
std::vector<LocalModel> federated_round_delayed(std::vector<LocalModel> models,
                                                const std::vector<std::vector<double>>& stale_params,
                                                const Graph& g, double sharing_step);

struct FlExperimentConfig {
    SharingMode mode = SharingMode::kRevised;
    int staleness = 0;          // sharing rounds of delay; 0 = fresh parameters
    double sharing_step = 0.0;  // 0 = the stable default 1/(d_max + 1)
    int rounds = 8;             // sharing rounds
    int epochs_per_round = 10;  // local epochs between shares
    int hidden = 16;
    TrainSettings train;
    int n_samples = 2000;
    int feature_dim = 32;
    int classes = 5;
    double noise = 1.0;
    std::uint64_t seed = 1;
};

struct FlCurvePoint {
    int round = 0;
    int node = 0;
    double accuracy = 0.0;
};

struct FlResult {
    std::vector<FlCurvePoint> curve;  // accuracy on the pooled test set
    double final_mean_accuracy = 0.0;
    std::string to_csv(const std::string& mode_label) const;  // round,node,mode,accuracy
};

// Local training + sharing cadence over the mode's topology; deterministic
// per seed.
FlResult run_fl_experiment(const FlExperimentConfig& cfg);

Graph fl_topology(SharingMode mode);

std::string to_string(SharingMode m);

}  // namespace risfl
