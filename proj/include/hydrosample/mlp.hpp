#ifndef HYDROSAMPLE_MLP_HPP
#define HYDROSAMPLE_MLP_HPP

#include "hydrosample/plans.hpp"
#include "hydrosample/transport.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace hydrosample {

enum class OutputActivation { identity, sigmoid };

/// Per-feature affine normalization: normalized = (v - shift) / scale.
struct Normalization {
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& rows) const;
};

/// Min-max normalization fitted over rows; zero-range features get scale 1.
Normalization fit_minmax(const Eigen::MatrixXd& rows);

struct TrainMeta {
    int epochs = 0;
    double learning_rate = 0.0;
    int batch_size = 0;
    std::uint64_t seed = 0;
    double final_train_loss = 0.0;
    double final_val_loss = 0.0;
};

/// Dense feed-forward network, ReLU hidden layers. Weights are row-major
/// (outputs x inputs); forward is x -> act(W x + b) layer by layer.
struct MlpModel {
    std::vector<int> layer_sizes;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    OutputActivation output_activation = OutputActivation::identity;
    Normalization input_norm;
    Normalization target_norm;
    TrainMeta train_meta;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
};

/// Seeded He-uniform initialization; biases start at zero.
MlpModel init_mlp(const std::vector<int>& layer_sizes, OutputActivation out_act,
                  std::uint64_t seed);

/// Single forward pass in raw (un-normalized) model space.
Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& input);

/// Batched forward pass: one column per sample.
Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);

struct TrainingSet {
    Eigen::MatrixXd inputs;  // samples x input-width
    Eigen::MatrixXd targets; // samples x output-width
};

struct TrainOptions {
    int epochs = 200;
    double learning_rate = 1e-3;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

/// Loss implied by the output activation: mean squared error for identity,
/// binary cross-entropy for sigmoid. Means are taken over batch and outputs.
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& targets);

/// Gradient of mlp_loss with respect to every weight and bias.
struct MlpGradient {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};
MlpGradient mlp_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::MatrixXd& targets);

/// Mini-batch Adam on the activation-implied loss. Deterministic given the
/// seed (single-threaded). Throws RuntimeError (with the epoch) if the loss
/// turns non-finite. Validation data, when non-empty, only fills train_meta.
MlpModel mlp_train(MlpModel model, const TrainingSet& data, const TrainOptions& opt,
                   const TrainingSet* validation = nullptr);

/// Whole-scenario 80/20 split (at least one held out), seeded shuffle.
struct ScenarioSplit {
    std::vector<int> train;
    std::vector<int> held_out;
};
ScenarioSplit split_scenarios(int count, std::uint64_t split_seed);

/// Decoder training data: one sample per timestep, inputs are the plan-node
/// concentrations, targets are all junction concentrations.
struct DecoderData {
    TrainingSet train;
    TrainingSet held_out;
    std::vector<int> train_matrices;    // indices into the input list
    std::vector<int> held_out_matrices;
};

/// Splits whole matrices 80/20 (at least one held out) with a seeded shuffle,
/// then assembles per-timestep samples for the plan.
DecoderData make_decoder_data(const SamplingPlan& plan, const std::vector<DataMatrix>& matrices,
                              std::uint64_t split_seed);

struct DecoderOptions {
    TrainOptions train;
    std::vector<int> hidden_sizes; // empty = one hidden layer of ceil((m+n)/2)
};

/// Trains the sensors -> all-junctions reconstructor for a plan.
MlpModel train_decoder(const SamplingPlan& plan, const std::vector<DataMatrix>& matrices,
                       std::uint64_t split_seed, const DecoderOptions& opt = {});

/// Trains the node-importance classifier: inputs are all-junction
/// concentration snapshots, targets the plan-membership vector of the
/// snapshot's scenario. All-zero snapshots are dropped.
MlpModel train_encoder(const std::vector<DataMatrix>& matrices,
                       const std::vector<SamplingPlan>& plans, std::uint64_t split_seed,
                       const TrainOptions& opt = {});

/// Average the encoder's per-timestep outputs over a scenario and threshold
/// at 0.5: the set of nodes predicted important.
std::vector<int> encode_important_nodes(const MlpModel& encoder, const DataMatrix& matrix);

/// Reconstructs all-junction dynamics from sensor rows (|plan| x K):
/// normalize, forward per timestep, denormalize, clamp negatives to zero.
Eigen::MatrixXd predict_dynamics(const MlpModel& model, const SamplingPlan& plan,
                                 const Eigen::MatrixXd& sensor_rows);

} // namespace hydrosample

#endif
