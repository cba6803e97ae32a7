// Copyright 2026 The PyramidNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pyramidnet/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pyramidnet/baselines.hpp"
#include "pyramidnet/data.hpp"
#include "pyramidnet/tomography.hpp"
#include "pyramidnet/train.hpp"

namespace pyramidnet::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (item.empty()) throw ConfigError("empty entry in list '" + std::string(text) + "'");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("not an integer: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<int> parse_architecture(std::string_view text) {
  std::vector<int> arch = parse_int_list(text);
  if (arch.size() < 2) throw ConfigError("architecture needs at least an input and an output width");
  for (std::size_t i = 0; i < arch.size(); ++i) {
    if (arch[i] < 1) throw ConfigError("architecture widths must be positive");
    if (i > 0 && arch[i] > arch[i - 1]) {
      throw ConfigError("architecture " + std::string(text) + " widens at layer " + std::to_string(i) +
                        "; a pyramid layer needs n_out <= n_in");
    }
  }
  if (arch[0] < 2) throw ConfigError("input width must be at least 2");
  return arch;
}

void save_network_json(const Network& net, const fs::path& path) {
  json j;
  j["format"] = "pyramidnet-model";
  j["version"] = 1;
  j["loss"] = std::string(to_string(net.loss()));
  j["layers"] = json::array();
  for (const auto& layer : net.layers()) {
    json l;
    l["n_in"] = layer.pyramid.n_in();
    l["n_out"] = layer.pyramid.n_out();
    l["angles"] = layer.pyramid.angles();
    l["activation"] = std::string(to_string(layer.activation));
    l["bias"] = layer.bias ? json(*layer.bias) : json(nullptr);
    j["layers"].push_back(std::move(l));
  }
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << std::setprecision(17) << j.dump(2) << '\n';
}

Network load_network_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw data::DataError(data::DataErrorKind::kIo, "cannot open model " + path.string());
  try {
    const json j = json::parse(f);
    if (j.value("format", "") != "pyramidnet-model") throw data::DataError(data::DataErrorKind::kBadMagic, "not a model file");
    std::vector<NetworkLayer> layers;
    for (const auto& l : j.at("layers")) {
      PyramidSchedule schedule = PyramidSchedule::build(l.at("n_in").get<int>(), l.at("n_out").get<int>());
      NetworkLayer layer{PyramidLayer(std::move(schedule), l.at("angles").get<Vec>()), std::nullopt,
                         parse_activation(l.at("activation").get<std::string>())};
      if (!l.at("bias").is_null()) layer.bias = l.at("bias").get<Vec>();
      layers.push_back(std::move(layer));
    }
    return Network(std::move(layers), parse_loss(j.at("loss").get<std::string>()));
  } catch (const json::exception& e) {
    throw data::DataError(data::DataErrorKind::kRange, "malformed model " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> config_to_args(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
  std::vector<std::string> args;
  for (const auto& [raw_key, value] : j.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") throw ConfigError("config files cannot nest --config");
    auto scalar = [&](const json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number_integer()) return std::to_string(v.get<long long>());
      if (v.is_number()) {
        std::ostringstream os;
        os << std::setprecision(17) << v.get<double>();
        return os.str();
      }
      throw ConfigError("config key '" + raw_key + "' has an unsupported value");
    };
    if (value.is_boolean()) {
      args.push_back(value.get<bool>() ? "--" + key : "--no-" + key);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v);
      args.push_back("--" + key);
      args.push_back(joined);
    } else {
      args.push_back("--" + key);
      args.push_back(scalar(value));
    }
  }
  return args;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// -- train --

struct TrainArgs {
  std::string arch = "4,2";
  std::string data = "synthetic";
  std::string data_dir;
  std::string classes = "6,9";
  int pca = -1;
  std::size_t train_size = 5000;
  std::size_t test_size = 1000;
  double separation = 6.0;
  double lr = 0.1;
  int epochs = 10;
  int batch_size = 50;
  std::uint64_t seed = 1;
  int eval_interval = 0;
  std::string updater = "pyramid";
  double svb_epsilon = 0.05;
  std::string activation = "sigmoid";
  std::string output_activation = "identity";
  std::string loss = "softmax_ce";
  bool bias = false;
  std::string out_dir = ".";
  std::string save_model;
};

struct TrainPlan {
  std::vector<int> arch;
  Network::Options net;
  TrainConfig cfg;
  std::vector<std::string> trainers;
  std::set<int> classes;
  std::size_t pca_k = 0;
};

TrainPlan plan_train(const TrainArgs& a) {
  TrainPlan p;
  try {
    p.arch = parse_architecture(a.arch);
    p.net.hidden_activation = parse_activation(a.activation);
    p.net.output_activation = parse_activation(a.output_activation);
    p.net.loss = parse_loss(a.loss);
    p.net.bias = a.bias;
    p.cfg.learning_rate = a.lr;
    p.cfg.epochs = a.epochs;
    p.cfg.batch_size = a.batch_size;
    p.cfg.seed = a.seed;
    p.cfg.eval_interval = a.eval_interval;
    p.cfg.validate();
    std::stringstream ss(a.updater);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name != "pyramid") parse_updater(name);
      p.trainers.push_back(name);
    }
    if (p.trainers.empty()) throw ConfigError("no trainer selected");
    if (a.svb_epsilon < 0.0) throw ConfigError("--svb-epsilon must be >= 0");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (a.data == "mnist") {
    for (int c : parse_int_list(a.classes)) {
      if (c < 0 || c > 9) throw ConfigError("MNIST classes are 0..9");
      p.classes.insert(c);
    }
    const std::size_t n_classes = p.classes.empty() ? 10 : p.classes.size();
    if (n_classes > static_cast<std::size_t>(p.arch.back())) {
      throw ConfigError("output width " + std::to_string(p.arch.back()) + " cannot separate " +
                        std::to_string(n_classes) + " classes");
    }
    p.pca_k = a.pca < 0 ? static_cast<std::size_t>(p.arch.front()) : static_cast<std::size_t>(a.pca);
    const std::size_t width = p.pca_k == 0 ? 784 : p.pca_k;
    if (width != static_cast<std::size_t>(p.arch.front())) {
      throw ConfigError("input width " + std::to_string(p.arch.front()) + " does not match feature width " +
                        std::to_string(width));
    }
    if (p.pca_k > 784) throw ConfigError("--pca exceeds 784");
  } else if (a.data == "synthetic") {
    if (p.arch.back() < 2) throw ConfigError("synthetic data has two classes; output width must be >= 2");
    if (a.separation <= 0.0) throw ConfigError("--separation must be positive");
  } else {
    throw ConfigError("--data must be mnist or synthetic");
  }
  if (a.train_size == 0 || a.test_size == 0) throw ConfigError("--train-size and --test-size must be positive");
  return p;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const TrainPlan p = plan_train(a);
  data::PreparedData d;
  if (a.data == "mnist") {
    const fs::path dir = data::resolve_data_dir(a.data_dir.empty() ? std::nullopt : std::optional<std::string>(a.data_dir));
    data::MnistOptions mo;
    mo.classes = p.classes;
    mo.train_size = a.train_size;
    mo.test_size = a.test_size;
    mo.pca_k = p.pca_k;
    d = data::prepare_mnist(dir, mo);
    out << "data: mnist from " << dir.string() << ", " << d.train.size() << " train / " << d.test.size()
        << " test\n";
  } else {
    d = data::prepare_synthetic(a.train_size, a.test_size, p.arch.front(), a.separation, a.seed);
    out << "data: synthetic blobs, " << d.train.size() << " train / " << d.test.size() << " test\n";
  }

  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw ConfigError("cannot create " + a.out_dir + ": " + ec.message());

  for (const std::string& name : p.trainers) {
    MetricsTable metrics;
    if (name == "pyramid") {
      std::mt19937_64 rng(a.seed);
      Network net = Network::random(p.arch, p.net, rng);
      metrics = train(net, d.train, d.test, p.cfg);
      if (!a.save_model.empty()) {
        save_network_json(net, a.save_model);
        out << "model: " << a.save_model << '\n';
      }
    } else {
      DenseOptions dopt;
      dopt.network = p.net;
      dopt.svb.epsilon = a.svb_epsilon;
      metrics = dense_train_baseline(p.arch, parse_updater(name), d.train, d.test, p.cfg, dopt).metrics;
    }
    const fs::path csv = fs::path(a.out_dir) / ("metrics_" + name + ".csv");
    metrics.write_csv(csv);
    out << name << ": final_test_accuracy=" << std::fixed << std::setprecision(4)
        << metrics.final_accuracy().value_or(0.0) << std::defaultfloat << " metrics=" << csv.string() << '\n';
  }
  return kOk;
}

// -- qsim-verify --

struct VerifyArgs {
  int min_n = 2;
  int max_n = 10;
  int layers = 50;
  int vectors = 100;
  std::uint64_t seed = 1;
  bool inject_bad_angle = false;
};

Vec random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  double s = 0.0;
  do {
    for (double& x : v) x = g(rng);
    s = norm2(v);
  } while (s < 1e-6);
  for (double& x : v) x /= s;
  return v;
}

int cmd_qsim_verify(const VerifyArgs& a, std::ostream& out) {
  if (a.min_n < 2 || a.max_n > 12 || a.min_n > a.max_n) {
    throw ConfigError("qsim-verify sizes must satisfy 2 <= min-n <= max-n <= 12");
  }
  if (a.layers < 1 || a.vectors < 1) throw ConfigError("--layers and --vectors must be positive");
  std::mt19937_64 rng(a.seed);
  int failures = 0;
  auto report = [&](const std::string& name, int n, bool ok, double value) {
    out << name << "[n=" << n << "]=" << (ok ? "pass" : "fail") << ':' << std::scientific << std::setprecision(2)
        << value << std::defaultfloat << '\n';
    failures += ok ? 0 : 1;
  };
  for (int n = a.min_n; n <= a.max_n; ++n) {
    double equiv = 0.0;
    double leak = 0.0;
    double norm_err = 0.0;
    std::uniform_int_distribution<int> out_width(1, n);
    for (int l = 0; l < a.layers; ++l) {
      const int m = l % 2 == 0 ? n : out_width(rng);
      PyramidLayer layer = PyramidLayer::random(n, m, rng);
      const Mat w = matrix_from_angles(layer);
      PyramidLayer simulated = layer;
      if (a.inject_bad_angle && l == 0) simulated.set_angle(0, simulated.angle(0) + 0.1);
      const qsim::UnarySubmatrix u = qsim::unary_submatrix(simulated);
      equiv = std::max(equiv, max_abs_diff(u.matrix, w));
      leak = std::max(leak, u.leakage);
      qsim::StateVector s(n);
      qsim::apply_loader(s, qsim::load_angles(random_unit(n, rng)));
      qsim::apply_pyramid(s, simulated);
      norm_err = std::max(norm_err, std::abs(s.norm() - 1.0));
    }
    report("equivalence", n, equiv <= 1e-10, equiv);
    report("leakage", n, leak <= 1e-12, leak);
    report("norm", n, norm_err <= 1e-12, norm_err);

    std::vector<Vec> inputs;
    for (int v = 0; v < a.vectors; ++v) inputs.push_back(random_unit(n, rng));
    // zero tails and sign edge cases
    Vec e(n, 0.0);
    e[0] = 1.0;
    inputs.push_back(e);
    e[0] = -1.0;
    inputs.push_back(e);
    e.assign(n, 0.0);
    e[n - 1] = -1.0;
    inputs.push_back(e);
    e.assign(n, 0.0);
    e[0] = 0.6;
    e[1] = -0.8;
    inputs.push_back(e);
    double loader_err = 0.0;
    for (const Vec& x : inputs) {
      qsim::StateVector s(n);
      qsim::apply_loader(s, qsim::load_angles(x));
      loader_err = std::max(loader_err, max_abs_diff(s.unary_amplitudes(n), x));
    }
    report("loader", n, loader_err <= 1e-10, loader_err);
  }
  if (failures) {
    out << "qsim-verify: " << failures << " check(s) failed\n";
    return kCheckFailure;
  }
  out << "qsim-verify: all checks passed\n";
  return kOk;
}

// -- tomo-demo --

struct TomoArgs {
  int n = 8;
  std::uint64_t shots = 0;
  bool analytic = false;
  double delta = 0.05;
  double noise = 0.0;
  std::uint64_t seed = 1;
};

int cmd_tomo_demo(const TomoArgs& a, std::ostream& out) {
  if (a.n < 2 || a.n > 15) throw ConfigError("--n must lie in [2, 15]");
  if (!(a.delta > 0.0)) throw ConfigError("--delta must be positive");
  if (!(a.noise >= 0.0 && a.noise < 1.0)) throw ConfigError("--noise must lie in [0, 1)");
  std::mt19937_64 rng(a.seed);
  const PyramidLayer layer = PyramidLayer::random(a.n, a.n, rng);
  const Vec x = random_unit(a.n, rng);
  const Vec truth = forward(layer, x).y;

  qsim::TomographyConfig cfg;
  cfg.seed = a.seed;
  cfg.delta = a.delta;
  cfg.shots = a.analytic ? qsim::TomographyConfig::kAnalytic
              : a.shots ? a.shots
                        : static_cast<std::uint64_t>(std::ceil(10.0 * a.n / (a.delta * a.delta)));
  const qsim::NoiseModel noise{a.noise};
  out << "n=" << a.n << " shots=" << (cfg.analytic() ? std::string("analytic") : std::to_string(cfg.shots))
      << " noise=" << a.noise << '\n';
  for (qsim::Procedure proc : {qsim::Procedure::kPairwise, qsim::Procedure::kAncilla}) {
    for (bool mitigate : {false, true}) {
      cfg.mitigate = mitigate;
      qsim::TomographyResult r;
      try {
        r = proc == qsim::Procedure::kPairwise ? qsim::tomography_pairwise(layer, x, cfg, noise)
                                               : qsim::tomography_ancilla(layer, x, cfg, noise);
      } catch (const qsim::TomographyError& e) {
        out << "procedure=" << to_string(proc) << " mitigation=" << (mitigate ? "on" : "off") << " error=\""
            << e.what() << "\"\n";
        return kCheckFailure;
      }
      double err = max_abs_diff(std::span<const double>(r.estimate), std::span<const double>(truth));
      if (proc == qsim::Procedure::kPairwise) {
        Vec flipped = r.estimate;
        for (double& v : flipped) v = -v;
        err = std::min(err, max_abs_diff(std::span<const double>(flipped), std::span<const double>(truth)));
      }
      out << "procedure=" << to_string(proc) << " mitigation=" << (mitigate ? "on" : "off")
          << " linf_error=" << fmt(err) << " discard_fraction=" << fmt(r.discard_fraction) << '\n';
    }
  }
  return kOk;
}

// -- bench-scaling --

struct BenchArgs {
  std::string sizes = "64,128,256,512";
  int reps = 5;
  int warmup = 1;
  double lr = 0.01;
  std::uint64_t seed = 1;
  std::string out = "bench_scaling.csv";
};

template <typename F>
double median_ms(F&& step, int reps, int warmup) {
  for (int i = 0; i < warmup; ++i) step();
  std::vector<double> t;
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    step();
    t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(t.begin(), t.end());
  return t.size() % 2 ? t[t.size() / 2] : 0.5 * (t[t.size() / 2 - 1] + t[t.size() / 2]);
}

int cmd_bench_scaling(const BenchArgs& a, std::ostream& out) {
  const std::vector<int> sizes = parse_int_list(a.sizes);
  for (int n : sizes)
    if (n < 2) throw ConfigError("bench sizes must be >= 2");
  if (a.reps < 1 || a.warmup < 0) throw ConfigError("--reps must be >= 1 and --warmup >= 0");
  std::ofstream csv(a.out);
  if (!csv) throw ConfigError("cannot write " + a.out);
  csv << "n,pyramid_ms,svb_ms\n";
  std::mt19937_64 rng(a.seed);
  std::vector<double> ratios;
  for (int n : sizes) {
    const std::vector<int> arch{n, n};
    Network::Options opts;
    opts.output_activation = Activation::kIdentity;
    opts.loss = Loss::kMse;
    Network net = Network::random(arch, opts, rng);
    const Vec x = random_unit(n, rng);
    const Vec target = random_unit(n, rng);
    const double pyramid_ms = median_ms(
        [&] {
          const NetworkForward pass = network_forward(net, x);
          const NetworkGradients g = network_backward(net, pass, Target{target});
          sgd_step(net, g, a.lr);
        },
        a.reps, a.warmup);

    Mat w = matrix_from_angles(PyramidLayer::random(n, n, rng));
    const SVBConfig svb{0.05};
    const double svb_ms = median_ms(
        [&] {
          const Vec y = matvec(w, x);
          Mat g(n, n);
          for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) g(i, k) = (y[i] - target[i]) * x[k];
          w = svb_update(w, g, a.lr, svb);
        },
        a.reps, a.warmup);
    const double ratio = svb_ms / std::max(pyramid_ms, 1e-9);
    ratios.push_back(ratio);
    csv << n << ',' << std::setprecision(9) << pyramid_ms << ',' << svb_ms << '\n';
    out << "n=" << n << " pyramid_ms=" << fmt(pyramid_ms) << " svb_ms=" << fmt(svb_ms) << " ratio=" << fmt(ratio)
        << '\n';
  }
  if (ratios.size() >= 2) out << "ratio_trend=" << fmt(ratios.back() / ratios.front()) << '\n';
  out << "wrote " << a.out << '\n';
  return kOk;
}

// -- export-matrix --

struct ExportArgs {
  int n = 8;
  int n_out = 0;
  std::string init = "random";
  std::string model;
  int layer = 0;
  std::string out = "matrix.csv";
  std::string import;
  std::uint64_t seed = 1;
};

int report_decomposition(const Mat& w, std::ostream& out) {
  const AngleDecomposition dec = angles_from_matrix(w);
  Mat rebuilt = matrix_from_angles(dec.layer);
  for (int r : dec.flipped_outputs)
    for (std::size_t c = 0; c < rebuilt.cols(); ++c) rebuilt(r, c) = -rebuilt(r, c);
  const double residual = max_abs_diff(rebuilt, w);
  out << "determinant=" << (dec.flipped_outputs.empty() ? "+1" : "-1") << " sign_mask=";
  if (dec.flipped_outputs.empty()) out << "none";
  for (std::size_t i = 0; i < dec.flipped_outputs.size(); ++i) out << (i ? "," : "") << dec.flipped_outputs[i];
  out << " angle_roundtrip_residual=" << std::scientific << std::setprecision(3) << residual << std::defaultfloat
      << '\n';
  return residual <= 1e-8 ? kOk : kCheckFailure;
}

int cmd_export_matrix(const ExportArgs& a, std::ostream& out) {
  if (!a.import.empty()) {
    const Mat w = import_matrix_csv(a.import);
    if (!w.square()) throw data::DataError(data::DataErrorKind::kRange, "imported matrix is not square");
    try {
      return report_decomposition(w, out);
    } catch (const NotOrthogonalError& e) {
      out << "import failed: " << e.what() << '\n';
      return kCheckFailure;
    }
  }
  PyramidLayer layer(2, 2);
  if (!a.model.empty()) {
    const Network net = load_network_json(a.model);
    if (a.layer < 0 || static_cast<std::size_t>(a.layer) >= net.layers().size()) {
      throw ConfigError("--layer out of range for the model");
    }
    layer = net.layers()[a.layer].pyramid;
  } else {
    const int m = a.n_out == 0 ? a.n : a.n_out;
    if (a.n < 2 || m < 1 || m > a.n) throw ConfigError("need n >= 2 and 1 <= n-out <= n");
    if (a.init == "zero") {
      layer = PyramidLayer(a.n, m);
    } else if (a.init == "random") {
      std::mt19937_64 rng(a.seed);
      layer = PyramidLayer::random(a.n, m, rng);
    } else {
      throw ConfigError("--init must be random or zero");
    }
  }
  const Mat w = matrix_from_angles(layer);
  export_matrix_csv(w, a.out);
  const Mat back = import_matrix_csv(a.out);
  out << "wrote " << a.out << " (" << w.rows() << "x" << w.cols() << ") csv_residual=" << std::scientific
      << std::setprecision(3) << max_abs_diff(back, w) << std::defaultfloat << '\n';
  if (!back.square()) return kOk;
  return report_decomposition(back, out);
}

// Inserts the arguments of --config files right after the subcommand so that
// explicit flags, which come later, win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> injected;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
    if (!path.empty()) {
      const auto extra = config_to_args(path);
      injected.insert(injected.end(), extra.begin(), extra.end());
    }
  }
  if (args.empty()) return args;
  out.push_back(args[0]);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pyramidnet: orthogonal networks built from pyramidal rotation circuits"};
  app.name("pyramidnet");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  std::string config_path;

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a pyramid network and/or a dense baseline");
  train->add_option("--config", config_path, "JSON file with flat keys mirroring these flags");
  train->add_option("--arch", ta.arch, "Layer widths, e.g. 4,4,2");
  train->add_option("--data", ta.data, "mnist or synthetic");
  train->add_option("--data-dir", ta.data_dir, "IDX directory (default: $PYRAMIDNET_DATA_DIR, then data/mnist)");
  train->add_option("--classes", ta.classes, "MNIST digits to keep");
  train->add_option("--pca", ta.pca, "PCA components (-1: input width, 0: raw pixels)");
  train->add_option("--train-size", ta.train_size);
  train->add_option("--test-size", ta.test_size);
  train->add_option("--separation", ta.separation, "Blob separation for synthetic data");
  train->add_option("--lr", ta.lr, "Learning rate");
  train->add_option("--epochs", ta.epochs);
  train->add_option("--batch-size", ta.batch_size);
  train->add_option("--seed", ta.seed);
  train->add_option("--eval-interval", ta.eval_interval, "Also evaluate every N minibatches (0: per epoch)");
  train->add_option("--updater", ta.updater, "Comma list of pyramid, plain, svb, stiefel");
  train->add_option("--svb-epsilon", ta.svb_epsilon, "Singular value band for svb");
  train->add_option("--activation", ta.activation, "Hidden activation: sigmoid, relu, identity");
  train->add_option("--output-activation", ta.output_activation);
  train->add_option("--loss", ta.loss, "softmax_ce or mse");
  train->add_flag("--bias,!--no-bias", ta.bias, "Add a trainable bias after each layer");
  train->add_option("--out-dir", ta.out_dir, "Directory for metrics_<trainer>.csv");
  train->add_option("--save-model", ta.save_model, "Write the trained pyramid network as JSON");

  VerifyArgs va;
  auto* verify = app.add_subcommand("qsim-verify", "Check the unary simulator against the classical layer");
  verify->add_option("--config", config_path);
  verify->add_option("--min-n", va.min_n);
  verify->add_option("--max-n", va.max_n, "Largest register size (at most 12)");
  verify->add_option("--layers", va.layers, "Random layers per size");
  verify->add_option("--vectors", va.vectors, "Random loader inputs per size");
  verify->add_option("--seed", va.seed);
  verify->add_flag("--inject-bad-angle,!--no-inject-bad-angle", va.inject_bad_angle,
                   "Perturb one simulated angle to exercise the failure path");

  TomoArgs toa;
  auto* tomo = app.add_subcommand("tomo-demo", "Run both tomography procedures on a random layer");
  tomo->add_option("--config", config_path);
  tomo->add_option("--n", toa.n);
  tomo->add_option("--shots", toa.shots, "Shots per circuit (0: 10 n / delta^2)");
  tomo->add_flag("--analytic,!--no-analytic", toa.analytic, "Use exact outcome probabilities");
  tomo->add_option("--delta", toa.delta);
  tomo->add_option("--noise", toa.noise, "Bit-flip probability per measured qubit");
  tomo->add_option("--seed", toa.seed);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench-scaling", "Time one update step, pyramid vs SVB");
  bench->add_option("--config", config_path);
  bench->add_option("--sizes", ba.sizes);
  bench->add_option("--reps", ba.reps, "Timed repetitions (median reported)");
  bench->add_option("--warmup", ba.warmup);
  bench->add_option("--lr", ba.lr);
  bench->add_option("--seed", ba.seed);
  bench->add_option("--out", ba.out, "CSV path (n,pyramid_ms,svb_ms)");

  ExportArgs ea;
  auto* exporter = app.add_subcommand("export-matrix", "Write a layer matrix to CSV, or decompose an imported one");
  exporter->add_option("--config", config_path);
  exporter->add_option("--n", ea.n);
  exporter->add_option("--n-out", ea.n_out, "0: square");
  exporter->add_option("--init", ea.init, "random or zero");
  exporter->add_option("--model", ea.model, "Model JSON written by train --save-model");
  exporter->add_option("--layer", ea.layer);
  exporter->add_option("--out", ea.out);
  exporter->add_option("--import", ea.import, "Decompose this CSV matrix back into angles");
  exporter->add_option("--seed", ea.seed);

  try {
    std::vector<std::string> expanded;
    try {
      expanded = expand_config(args);
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << '\n';
      return kConfigError;
    }
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (train->parsed()) return cmd_train(ta, out);
    if (verify->parsed()) return cmd_qsim_verify(va, out);
    if (tomo->parsed()) return cmd_tomo_demo(toa, out);
    if (bench->parsed()) return cmd_bench_scaling(ba, out);
    if (exporter->parsed()) return cmd_export_matrix(ea, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const data::DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace pyramidnet::cli
