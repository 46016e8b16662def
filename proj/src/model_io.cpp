#include "sdfield/model_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "sdfield/binary_io.hpp"
#include "sdfield/error.hpp"

namespace sdfield {

namespace {

constexpr char kModelMagic[4] = {'D', 'I', 'S', 'N'};
constexpr std::uint32_t kModelVersion = 1;

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::ParseError, "bad integer list '" + s + "'");
    }
  }
  return out;
}

MlpParams mlp_shell(const std::vector<int>& dims, Activation hidden, Activation output) {
  MlpParams p;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer l;
    l.weight = RowMatrix::Zero(dims[i + 1], dims[i]);
    l.bias = Eigen::VectorXd::Zero(dims[i + 1]);
    l.activation = i + 2 == dims.size() ? output : hidden;
    p.layers.push_back(std::move(l));
  }
  return p;
}

}  // namespace

void write_model(std::ostream& out, const SdfModel& model) {
  model.validate();
  out.write(kModelMagic, 4);
  binary::write_u32(out, kModelVersion);
  std::vector<int> enc;
  for (const auto& l : model.encoder.layers) enc.push_back(l.out_channels);
  out << "variant=" << to_string(model.variant) << '\n'
      << "local_stream=" << (model.local_stream ? "on" : "off") << '\n'
      << "image=" << model.encoder.image_width << 'x' << model.encoder.image_height << 'x'
      << model.encoder.image_channels << '\n'
      << "encoder_channels=" << join(enc) << '\n'
      << "point_lift=" << join(model.point_lift.dims()) << '\n'
      << "point_lift_activation=" << to_string(model.point_lift.layers.back().activation) << '\n'
      << "global_decoder=" << join(model.global_decoder.dims()) << '\n'
      << "local_decoder=" << join(model.local_decoder.dims()) << '\n'
      << "hidden_activation=relu\n"
      << '\n';
  auto& mutable_model = const_cast<SdfModel&>(model);
  for (const auto& block : parameter_blocks(mutable_model)) {
    for (double v : block.values) binary::write_f32(out, static_cast<float>(v));
  }
  if (!out) throw Error(ErrorKind::IoError, "failed writing model stream");
}

SdfModel read_model(std::istream& in) {
  char magic[4] = {};
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kModelMagic)) {
    throw Error(ErrorKind::ParseError, "missing DISN magic");
  }
  const auto version = binary::read_u32(in);
  if (version != kModelVersion) {
    throw Error(ErrorKind::ParseError, "unsupported model version " + std::to_string(version));
  }
  std::map<std::string, std::string> header;
  std::string line;
  for (;;) {
    if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "unterminated model header");
    if (line.empty()) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "bad header line '" + line + "'");
    header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const char* key) {
    const auto it = header.find(key);
    if (it == header.end()) throw Error(ErrorKind::ParseError, std::string("model header lacks ") + key);
    return it->second;
  };

  SdfModel m;
  m.variant = variant_from_string(get("variant"));
  m.local_stream = get("local_stream") == "on";
  int w = 0;
  int h = 0;
  int c = 0;
  if (std::sscanf(get("image").c_str(), "%dx%dx%d", &w, &h, &c) != 3) {
    throw Error(ErrorKind::ParseError, "bad image shape in model header");
  }
  m.encoder.image_width = w;
  m.encoder.image_height = h;
  m.encoder.image_channels = c;
  int cin = c;
  for (int cout : split_ints(get("encoder_channels"))) {
    ConvLayer layer;
    layer.in_channels = cin;
    layer.out_channels = cout;
    layer.kernel.assign(static_cast<std::size_t>(cout) * cin * 9, 0.0);
    layer.bias.assign(static_cast<std::size_t>(cout), 0.0);
    m.encoder.layers.push_back(std::move(layer));
    cin = cout;
  }
  const Activation hidden = activation_from_string(get("hidden_activation"));
  m.point_lift = mlp_shell(split_ints(get("point_lift")), hidden,
                           activation_from_string(get("point_lift_activation")));
  m.global_decoder = mlp_shell(split_ints(get("global_decoder")), hidden, Activation::linear);
  m.local_decoder = mlp_shell(split_ints(get("local_decoder")), hidden, Activation::linear);
  m.validate();
  for (auto& block : parameter_blocks(m)) {
    for (double& v : block.values) v = binary::read_f32(in);
  }
  return m;
}

void save_model(const std::string& path, const SdfModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_model(out, model);
}

SdfModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_model(in);
}

}  // namespace sdfield
