#include "hydrosample/mlp.hpp"
#include "hydrosample/errors.hpp"
#include "hydrosample/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace hydrosample {

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return ((-z.array()).exp() + 1.0).inverse().matrix();
}

void check_model(const MlpModel& m) {
    if (m.layer_sizes.size() < 2) throw ValidationError("mlp: need at least input and output layers");
    if (m.weights.size() != m.layer_sizes.size() - 1 || m.biases.size() != m.weights.size()) {
        throw ValidationError("mlp: weight/bias count does not match layer_sizes");
    }
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        if (m.weights[l].rows() != m.layer_sizes[l + 1] || m.weights[l].cols() != m.layer_sizes[l] ||
            m.biases[l].size() != m.layer_sizes[l + 1]) {
            throw ValidationError("mlp: layer " + std::to_string(l) + " has mismatched shapes");
        }
    }
}

} // namespace

Eigen::MatrixXd Normalization::apply(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != shift.size()) throw ValidationError("normalization: feature width mismatch");
    return (rows.rowwise() - shift.transpose()).array().rowwise() /
           scale.transpose().array();
}

Eigen::MatrixXd Normalization::invert(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != shift.size()) throw ValidationError("normalization: feature width mismatch");
    return (rows.array().rowwise() * scale.transpose().array()).matrix().rowwise() +
           shift.transpose();
}

Normalization fit_minmax(const Eigen::MatrixXd& rows) {
    if (rows.rows() == 0) throw ValidationError("normalization: no rows to fit");
    Normalization n;
    n.shift = rows.colwise().minCoeff();
    Eigen::VectorXd range = rows.colwise().maxCoeff().transpose() - n.shift;
    n.scale = range.unaryExpr([](double r) { return r > 0.0 ? r : 1.0; });
    return n;
}

MlpModel init_mlp(const std::vector<int>& layer_sizes, OutputActivation out_act,
                  std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw ValidationError("mlp: need at least two layers");
    for (int s : layer_sizes) {
        if (s <= 0) throw ValidationError("mlp: layer sizes must be positive");
    }
    MlpModel m;
    m.layer_sizes = layer_sizes;
    m.output_activation = out_act;
    SplitRng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                w(i, j) = rng.next_double(-limit, limit);
            }
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    // identity normalization by default; training wrappers overwrite it
    m.input_norm.shift = Eigen::VectorXd::Zero(layer_sizes.front());
    m.input_norm.scale = Eigen::VectorXd::Ones(layer_sizes.front());
    m.target_norm.shift = Eigen::VectorXd::Zero(layer_sizes.back());
    m.target_norm.scale = Eigen::VectorXd::Ones(layer_sizes.back());
    return m;
}

Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    check_model(model);
    if (inputs.rows() != model.layer_sizes.front()) {
        throw ValidationError("mlp: input size " + std::to_string(inputs.rows()) +
                              " does not match layer size " +
                              std::to_string(model.layer_sizes.front()));
    }
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        Eigen::MatrixXd z = (model.weights[l] * a).colwise() + model.biases[l];
        const bool last = l + 1 == model.weights.size();
        if (!last) {
            a = relu(z);
        } else if (model.output_activation == OutputActivation::sigmoid) {
            a = sigmoid(z);
        } else {
            a = std::move(z);
        }
    }
    return a;
}

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& input) {
    return mlp_forward_batch(model, input);
}

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& targets) {
    const Eigen::MatrixXd out = mlp_forward_batch(model, inputs);
    if (out.rows() != targets.rows() || out.cols() != targets.cols()) {
        throw ValidationError("mlp: target shape mismatch");
    }
    const double count = static_cast<double>(out.size());
    if (model.output_activation == OutputActivation::sigmoid) {
        // clamped BCE
        const double eps = 1e-12;
        Eigen::ArrayXXd p = out.array().min(1.0 - eps).max(eps);
        Eigen::ArrayXXd y = targets.array();
        return -((y * p.log()) + (1.0 - y) * (1.0 - p).log()).sum() / count;
    }
    return (out - targets).squaredNorm() / count;
}

MlpGradient mlp_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::MatrixXd& targets) {
    check_model(model);
    const std::size_t n_layers = model.weights.size();

    std::vector<Eigen::MatrixXd> activations; // a_0 = inputs, ..., a_L = output
    activations.reserve(n_layers + 1);
    activations.push_back(inputs);
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd z = (model.weights[l] * activations.back()).colwise() + model.biases[l];
        const bool last = l + 1 == n_layers;
        if (!last) {
            activations.push_back(relu(z));
        } else if (model.output_activation == OutputActivation::sigmoid) {
            activations.push_back(sigmoid(z));
        } else {
            activations.push_back(std::move(z));
        }
    }

    const double count = static_cast<double>(targets.size());
    // Both MSE/identity and BCE/sigmoid reduce to (out - y) scaled:
    // d(MSE)/dz = 2 (out - y) / count, d(BCE)/dz = (sigmoid(z) - y) / count.
    Eigen::MatrixXd delta = activations.back() - targets;
    delta *= (model.output_activation == OutputActivation::sigmoid ? 1.0 : 2.0) / count;

    MlpGradient grad;
    grad.weights.resize(n_layers);
    grad.biases.resize(n_layers);
    for (std::size_t l = n_layers; l-- > 0;) {
        grad.weights[l] = delta * activations[l].transpose();
        grad.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = model.weights[l].transpose() * delta;
            // ReLU mask from the stored activation (a > 0 <=> z > 0)
            delta = (activations[l].array() > 0.0).cast<double>() * back.array();
        }
    }
    return grad;
}

MlpModel mlp_train(MlpModel model, const TrainingSet& data, const TrainOptions& opt,
                   const TrainingSet* validation) {
    check_model(model);
    const Eigen::Index n_samples = data.inputs.rows();
    if (n_samples == 0) throw ValidationError("mlp_train: empty training set");
    if (data.targets.rows() != n_samples) {
        throw ValidationError("mlp_train: inputs/targets row mismatch");
    }
    if (data.inputs.cols() != model.layer_sizes.front() ||
        data.targets.cols() != model.layer_sizes.back()) {
        throw ValidationError("mlp_train: sample width does not match the model");
    }
    if (opt.epochs <= 0 || opt.batch_size <= 0 || !(opt.learning_rate > 0.0)) {
        throw ValidationError("mlp_train: hyperparameters must be positive");
    }
    if (!data.inputs.allFinite() || !data.targets.allFinite()) {
        throw ValidationError("mlp_train: training data has non-finite values");
    }

    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        m_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        v_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        m_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
        v_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }

    SplitRng rng(opt.seed ^ 0x5eedf00dULL);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_samples));
    for (Eigen::Index i = 0; i < n_samples; ++i) order[static_cast<std::size_t>(i)] = i;

    long t = 0;
    double train_loss = 0.0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        // Fisher-Yates shuffle, seeded
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.next_below(i));
            std::swap(order[i - 1], order[j]);
        }
        for (Eigen::Index at = 0; at < n_samples; at += opt.batch_size) {
            const Eigen::Index bs = std::min<Eigen::Index>(opt.batch_size, n_samples - at);
            Eigen::MatrixXd bx(model.layer_sizes.front(), bs);
            Eigen::MatrixXd by(model.layer_sizes.back(), bs);
            for (Eigen::Index c = 0; c < bs; ++c) {
                const Eigen::Index row = order[static_cast<std::size_t>(at + c)];
                bx.col(c) = data.inputs.row(row).transpose();
                by.col(c) = data.targets.row(row).transpose();
            }
            const MlpGradient grad = mlp_gradient(model, bx, by);
            ++t;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                m_w[l] = beta1 * m_w[l] + (1.0 - beta1) * grad.weights[l];
                v_w[l] = beta2 * v_w[l].array().matrix() +
                         (1.0 - beta2) * grad.weights[l].cwiseAbs2();
                model.weights[l].array() -=
                    opt.learning_rate * (m_w[l].array() / bc1) /
                    ((v_w[l].array() / bc2).sqrt() + adam_eps);
                m_b[l] = beta1 * m_b[l] + (1.0 - beta1) * grad.biases[l];
                v_b[l] = beta2 * v_b[l] + (1.0 - beta2) * grad.biases[l].cwiseAbs2();
                model.biases[l].array() -=
                    opt.learning_rate * (m_b[l].array() / bc1) /
                    ((v_b[l].array() / bc2).sqrt() + adam_eps);
            }
        }
        train_loss = mlp_loss(model, data.inputs.transpose(), data.targets.transpose());
        if (!std::isfinite(train_loss)) {
            throw RuntimeError("mlp_train: loss became non-finite at epoch " +
                               std::to_string(epoch));
        }
    }

    model.train_meta.epochs = opt.epochs;
    model.train_meta.learning_rate = opt.learning_rate;
    model.train_meta.batch_size = opt.batch_size;
    model.train_meta.seed = opt.seed;
    model.train_meta.final_train_loss = train_loss;
    model.train_meta.final_val_loss =
        (validation && validation->inputs.rows() > 0)
            ? mlp_loss(model, validation->inputs.transpose(), validation->targets.transpose())
            : 0.0;
    return model;
}

ScenarioSplit split_scenarios(int count, std::uint64_t split_seed) {
    if (count <= 0) throw ValidationError("split_scenarios: nothing to split");
    SplitRng rng(split_seed ^ 0x9177a0ffULL);
    std::vector<int> shuffled = sample_without_replacement(count, count, rng);
    int n_held = static_cast<int>(std::llround(0.2 * count));
    if (count > 1) n_held = std::clamp(n_held, 1, count - 1);
    ScenarioSplit split;
    split.held_out.assign(shuffled.begin(), shuffled.begin() + n_held);
    split.train.assign(shuffled.begin() + n_held, shuffled.end());
    std::sort(split.held_out.begin(), split.held_out.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& values, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = values.row(rows[i]);
    }
    return out;
}

} // namespace

DecoderData make_decoder_data(const SamplingPlan& plan, const std::vector<DataMatrix>& matrices,
                              std::uint64_t split_seed) {
    if (matrices.empty()) throw ValidationError("decoder: no data matrices");
    const int n = matrices.front().n_nodes();
    for (const auto& m : matrices) {
        if (m.node_index != matrices.front().node_index) {
            throw ValidationError("decoder: matrices use different node indexings");
        }
    }
    if (plan.nodes.empty()) throw ValidationError("decoder: empty plan");
    for (int v : plan.nodes) {
        if (v < 0 || v >= n) {
            throw ValidationError("decoder: plan is wider than the network (node " +
                                  std::to_string(v) + ")");
        }
    }

    DecoderData out;
    const ScenarioSplit split = split_scenarios(static_cast<int>(matrices.size()), split_seed);
    out.train_matrices = split.train;
    out.held_out_matrices = split.held_out;

    auto assemble = [&](const std::vector<int>& which, TrainingSet& set) {
        Eigen::Index total = 0;
        for (int mi : which) total += matrices[static_cast<std::size_t>(mi)].values.cols();
        set.inputs.resize(total, static_cast<Eigen::Index>(plan.nodes.size()));
        set.targets.resize(total, n);
        Eigen::Index at = 0;
        for (int mi : which) {
            const auto& vals = matrices[static_cast<std::size_t>(mi)].values;
            const Eigen::MatrixXd sensor = gather_rows(vals, plan.nodes);
            set.inputs.middleRows(at, vals.cols()) = sensor.transpose();
            set.targets.middleRows(at, vals.cols()) = vals.transpose();
            at += vals.cols();
        }
    };
    assemble(out.train_matrices, out.train);
    assemble(out.held_out_matrices, out.held_out);
    return out;
}

MlpModel train_decoder(const SamplingPlan& plan, const std::vector<DataMatrix>& matrices,
                       std::uint64_t split_seed, const DecoderOptions& opt) {
    DecoderData data = make_decoder_data(plan, matrices, split_seed);
    const int m = static_cast<int>(plan.nodes.size());
    const int n = static_cast<int>(data.train.targets.cols());

    std::vector<int> sizes{m};
    if (opt.hidden_sizes.empty()) {
        sizes.push_back((m + n + 1) / 2);
    } else {
        sizes.insert(sizes.end(), opt.hidden_sizes.begin(), opt.hidden_sizes.end());
    }
    sizes.push_back(n);

    MlpModel model = init_mlp(sizes, OutputActivation::identity, opt.train.seed);
    model.input_norm = fit_minmax(data.train.inputs);
    model.target_norm = fit_minmax(data.train.targets);

    TrainingSet normalized;
    normalized.inputs = model.input_norm.apply(data.train.inputs);
    normalized.targets = model.target_norm.apply(data.train.targets);
    TrainingSet val;
    if (data.held_out.inputs.rows() > 0) {
        val.inputs = model.input_norm.apply(data.held_out.inputs);
        val.targets = model.target_norm.apply(data.held_out.targets);
    }
    return mlp_train(std::move(model), normalized, opt.train,
                     val.inputs.rows() > 0 ? &val : nullptr);
}

MlpModel train_encoder(const std::vector<DataMatrix>& matrices,
                       const std::vector<SamplingPlan>& plans, std::uint64_t split_seed,
                       const TrainOptions& opt) {
    if (matrices.empty()) throw ValidationError("encoder: no data matrices");
    if (matrices.size() != plans.size()) {
        throw ValidationError("encoder: need exactly one plan per matrix, got " +
                              std::to_string(plans.size()) + " plans for " +
                              std::to_string(matrices.size()) + " matrices");
    }
    const int n = matrices.front().n_nodes();

    Eigen::Index total = 0;
    for (const auto& m : matrices) total += m.values.cols();

    Eigen::MatrixXd inputs(total, n);
    Eigen::MatrixXd targets(total, n);
    Eigen::Index at = 0;
    for (std::size_t s = 0; s < matrices.size(); ++s) {
        const auto& vals = matrices[s].values;
        if (matrices[s].node_index != matrices.front().node_index) {
            throw ValidationError("encoder: matrices use different node indexings");
        }
        Eigen::RowVectorXd label = Eigen::RowVectorXd::Zero(n);
        for (int v : plans[s].nodes) {
            if (v < 0 || v >= n) throw ValidationError("encoder: plan node out of range");
            label(v) = 1.0;
        }
        for (Eigen::Index k = 0; k < vals.cols(); ++k) {
            if (vals.col(k).isZero(0.0)) continue; // all-zero rows carry every label
            inputs.row(at) = vals.col(k).transpose();
            targets.row(at) = label;
            ++at;
        }
    }
    if (at == 0) throw ValidationError("encoder: every timestep is all-zero");
    inputs.conservativeResize(at, Eigen::NoChange);
    targets.conservativeResize(at, Eigen::NoChange);

    MlpModel model = init_mlp({n, n, n}, OutputActivation::sigmoid, opt.seed ^ split_seed);
    model.input_norm = fit_minmax(inputs);
    // targets are already {0,1}; keep the identity normalization

    TrainingSet set;
    set.inputs = model.input_norm.apply(inputs);
    set.targets = targets;
    return mlp_train(std::move(model), set, opt);
}

std::vector<int> encode_important_nodes(const MlpModel& encoder, const DataMatrix& matrix) {
    const Eigen::MatrixXd normalized = encoder.input_norm.apply(matrix.values.transpose());
    const Eigen::MatrixXd out = mlp_forward_batch(encoder, normalized.transpose());
    const Eigen::VectorXd mean = out.rowwise().mean();
    std::vector<int> nodes;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        if (mean(i) > 0.5) nodes.push_back(static_cast<int>(i));
    }
    return nodes;
}

Eigen::MatrixXd predict_dynamics(const MlpModel& model, const SamplingPlan& plan,
                                 const Eigen::MatrixXd& sensor_rows) {
    if (model.input_norm.shift.size() != static_cast<Eigen::Index>(plan.nodes.size())) {
        throw ValidationError("predict: model was trained for a different plan width");
    }
    if (sensor_rows.rows() != static_cast<Eigen::Index>(plan.nodes.size())) {
        throw ValidationError("predict: sensor rows do not match the plan");
    }
    const Eigen::Index k = sensor_rows.cols();
    if (k == 0) return Eigen::MatrixXd(model.output_size(), 0);

    const Eigen::MatrixXd normalized = model.input_norm.apply(sensor_rows.transpose());
    const Eigen::MatrixXd raw = mlp_forward_batch(model, normalized.transpose());
    Eigen::MatrixXd denorm = model.target_norm.invert(raw.transpose()).transpose();
    return denorm.cwiseMax(0.0); // concentrations cannot be negative
}

} // namespace hydrosample
