#include "kasper/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kasper::intent {

namespace {

constexpr const char* kMagic = "kasper-ckpt v1";

std::string hex(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

void write_row(std::ofstream& out, const double* values, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out << ' ';
    out << hex(values[i]);
  }
  out << '\n';
}

class Reader {
 public:
  Reader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw CheckpointError("cannot open checkpoint: " + path);
  }

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) throw CheckpointError(path_ + ": truncated checkpoint");
    ++line_no_;
    if (!l.empty() && l.back() == '\r') l.pop_back();
    return l;
  }

  void expect(const std::string& want) {
    std::string got = line();
    if (got != want) fail("expected '" + want + "', got '" + got + "'");
  }

  // "key v1 v2 ..." -> values
  std::vector<std::string> fields(const std::string& key, int count = -1) {
    std::istringstream ss(line());
    std::string head;
    ss >> head;
    if (head != key) fail("expected '" + key + " ...', got '" + head + "'");
    std::vector<std::string> out;
    std::string f;
    while (ss >> f) out.push_back(f);
    if (count >= 0 && static_cast<int>(out.size()) != count) {
      fail("expected " + std::to_string(count) + " fields after '" + key + "'");
    }
    return out;
  }

  std::vector<double> doubles_row(std::size_t n) {
    std::istringstream ss(line());
    std::vector<double> out;
    out.reserve(n);
    std::string f;
    while (ss >> f) out.push_back(parse_double(f));
    if (out.size() != n) fail("expected " + std::to_string(n) + " values");
    return out;
  }

  double parse_double(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) fail("bad double '" + s + "'");
    return v;
  }

  long parse_long(const std::string& s) {
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& why) {
    throw CheckpointError(path_ + ":" + std::to_string(line_no_) + ": " + why);
  }

 private:
  std::ifstream in_;
  std::string path_;
  int line_no_ = 0;
};

void write_config(std::ofstream& out, const TrainConfig& c) {
  out << "config lr " << hex(c.learning_rate) << " epochs " << c.epochs << " seed " << c.seed
      << " filters " << c.filters_per_width << " hidden " << c.hidden_size << '\n';
}

TrainConfig read_config(Reader& r) {
  auto f = r.fields("config", 10);
  if (f[0] != "lr" || f[2] != "epochs" || f[4] != "seed" || f[6] != "filters" || f[8] != "hidden") {
    r.fail("malformed config line");
  }
  TrainConfig c;
  c.learning_rate = r.parse_double(f[1]);
  c.epochs = static_cast<int>(r.parse_long(f[3]));
  c.seed = static_cast<std::uint64_t>(r.parse_long(f[5]));
  c.filters_per_width = static_cast<int>(r.parse_long(f[7]));
  c.hidden_size = static_cast<int>(r.parse_long(f[9]));
  return c;
}

}  // namespace

bool is_known_algorithm(const std::string& algo) {
  return algo == "cnn" || algo == "rnn" || algo == "knn" || algo == "fuzzy";
}

void save_checkpoint(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: keep \n exact on every platform
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);

  out << kMagic << '\n';
  out << "default_algo " << bundle.default_algo << '\n';
  out << "knn_k " << bundle.knn_k << '\n';

  out << "embeddings " << bundle.table.tokens.size() << ' ' << bundle.table.dim << '\n';
  for (std::size_t i = 0; i < bundle.table.tokens.size(); ++i) {
    out << bundle.table.tokens[i];
    for (double v : bundle.table.rows[i]) out << ' ' << hex(v);
    out << '\n';
  }

  out << "exemplars " << bundle.exemplars.examples.size() << '\n';
  for (const auto& ex : bundle.exemplars.examples) {
    out << ex.label << '\t' << ex.text << '\n';
  }

  if (bundle.cnn) {
    const CnnModel& m = *bundle.cnn;
    out << "cnn\n";
    write_config(out, m.config);
    out << "dim " << m.dim << '\n';
    out << "input_scale " << hex(m.input_scale) << '\n';
    out << "widths";
    for (int w : m.widths) out << ' ' << w;
    out << '\n';
    for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
      const int width = m.widths[wi];
      out << "bank " << wi << '\n';
      const std::size_t stride = static_cast<std::size_t>(width * m.dim);
      for (int f = 0; f < m.filters_per_width; ++f) {
        write_row(out, m.filters[wi].data() + static_cast<std::size_t>(f) * stride, stride);
      }
      out << "bias " << wi << '\n';
      write_row(out, m.filter_bias[wi].data(), m.filter_bias[wi].size());
    }
    out << "dense\n";
    const std::size_t pooled = m.widths.size() * static_cast<std::size_t>(m.filters_per_width);
    for (std::size_t j = 0; j < pooled; ++j) {
      write_row(out, m.dense_w.data() + j * kNumClasses, kNumClasses);
    }
    write_row(out, m.dense_b.data(), m.dense_b.size());
  }

  if (bundle.rnn) {
    const RnnModel& m = *bundle.rnn;
    out << "rnn\n";
    write_config(out, m.config);
    out << "dim " << m.dim << '\n';
    out << "input_scale " << hex(m.input_scale) << '\n';
    out << "hidden " << m.hidden << '\n';
    out << "w_xh\n";
    for (int d = 0; d < m.dim; ++d) {
      write_row(out, m.w_xh.data() + static_cast<std::size_t>(d * m.hidden),
                static_cast<std::size_t>(m.hidden));
    }
    out << "w_hh\n";
    for (int p = 0; p < m.hidden; ++p) {
      write_row(out, m.w_hh.data() + static_cast<std::size_t>(p * m.hidden),
                static_cast<std::size_t>(m.hidden));
    }
    out << "b_h\n";
    write_row(out, m.b_h.data(), m.b_h.size());
    out << "w_hy\n";
    for (int h = 0; h < m.hidden; ++h) {
      write_row(out, m.w_hy.data() + static_cast<std::size_t>(h * kNumClasses), kNumClasses);
    }
    out << "b_y\n";
    write_row(out, m.b_y.data(), m.b_y.size());
  }

  out << "end\n";
  if (!out) throw CheckpointError("write failed: " + path);
}

ModelBundle load_checkpoint(const std::string& path) {
  Reader r(path);
  r.expect(kMagic);

  ModelBundle bundle;
  auto algo = r.fields("default_algo", 1);
  if (!is_known_algorithm(algo[0])) r.fail("unknown default_algo");
  bundle.default_algo = algo[0];
  bundle.knn_k = static_cast<int>(r.parse_long(r.fields("knn_k", 1)[0]));

  auto emb = r.fields("embeddings", 2);
  const long vocab = r.parse_long(emb[0]);
  const int dim = static_cast<int>(r.parse_long(emb[1]));
  if (vocab < 0 || dim <= 0) r.fail("bad embeddings header");
  bundle.table.dim = dim;
  for (long i = 0; i < vocab; ++i) {
    std::istringstream ss(r.line());
    std::string token;
    if (!(ss >> token)) r.fail("missing token");
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(dim));
    std::string f;
    while (ss >> f) row.push_back(r.parse_double(f));
    if (static_cast<int>(row.size()) != dim) r.fail("embedding row length mismatch");
    bundle.table.index[token] = static_cast<int>(bundle.table.tokens.size());
    bundle.table.tokens.push_back(std::move(token));
    bundle.table.rows.push_back(std::move(row));
  }

  auto ex_header = r.fields("exemplars", 1);
  const long n_ex = r.parse_long(ex_header[0]);
  for (long i = 0; i < n_ex; ++i) {
    std::string line = r.line();
    auto tab = line.find('\t');
    if (tab == std::string::npos) r.fail("exemplar line missing tab");
    const int label = static_cast<int>(r.parse_long(line.substr(0, tab)));
    if (label < 0 || label >= kNumClasses) r.fail("exemplar label out of range");
    bundle.exemplars.examples.push_back({line.substr(tab + 1), label});
  }

  std::string section = r.line();
  while (section != "end") {
    if (section == "cnn") {
      CnnModel m;
      m.config = read_config(r);
      m.dim = static_cast<int>(r.parse_long(r.fields("dim", 1)[0]));
      m.input_scale = r.parse_double(r.fields("input_scale", 1)[0]);
      auto widths = r.fields("widths");
      m.widths.clear();
      for (const auto& w : widths) m.widths.push_back(static_cast<int>(r.parse_long(w)));
      m.filters_per_width = m.config.filters_per_width;
      for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
        auto bank_hdr = r.fields("bank", 1);
        if (r.parse_long(bank_hdr[0]) != static_cast<long>(wi)) r.fail("bank index mismatch");
        const std::size_t stride = static_cast<std::size_t>(m.widths[wi] * m.dim);
        std::vector<double> bank;
        bank.reserve(static_cast<std::size_t>(m.filters_per_width) * stride);
        for (int f = 0; f < m.filters_per_width; ++f) {
          auto row = r.doubles_row(stride);
          bank.insert(bank.end(), row.begin(), row.end());
        }
        m.filters.push_back(std::move(bank));
        auto bias_hdr = r.fields("bias", 1);
        if (r.parse_long(bias_hdr[0]) != static_cast<long>(wi)) r.fail("bias index mismatch");
        m.filter_bias.push_back(r.doubles_row(static_cast<std::size_t>(m.filters_per_width)));
      }
      r.expect("dense");
      const std::size_t pooled = m.widths.size() * static_cast<std::size_t>(m.filters_per_width);
      m.dense_w.clear();
      for (std::size_t j = 0; j < pooled; ++j) {
        auto row = r.doubles_row(kNumClasses);
        m.dense_w.insert(m.dense_w.end(), row.begin(), row.end());
      }
      m.dense_b = r.doubles_row(kNumClasses);
      bundle.cnn = std::move(m);
    } else if (section == "rnn") {
      RnnModel m;
      m.config = read_config(r);
      m.dim = static_cast<int>(r.parse_long(r.fields("dim", 1)[0]));
      m.input_scale = r.parse_double(r.fields("input_scale", 1)[0]);
      m.hidden = static_cast<int>(r.parse_long(r.fields("hidden", 1)[0]));
      r.expect("w_xh");
      for (int d = 0; d < m.dim; ++d) {
        auto row = r.doubles_row(static_cast<std::size_t>(m.hidden));
        m.w_xh.insert(m.w_xh.end(), row.begin(), row.end());
      }
      r.expect("w_hh");
      for (int p = 0; p < m.hidden; ++p) {
        auto row = r.doubles_row(static_cast<std::size_t>(m.hidden));
        m.w_hh.insert(m.w_hh.end(), row.begin(), row.end());
      }
      r.expect("b_h");
      m.b_h = r.doubles_row(static_cast<std::size_t>(m.hidden));
      r.expect("w_hy");
      for (int h = 0; h < m.hidden; ++h) {
        auto row = r.doubles_row(kNumClasses);
        m.w_hy.insert(m.w_hy.end(), row.begin(), row.end());
      }
      r.expect("b_y");
      m.b_y = r.doubles_row(kNumClasses);
      bundle.rnn = std::move(m);
    } else {
      r.fail("unknown section '" + section + "'");
    }
    section = r.line();
  }
  return bundle;
}

Prediction classify_with(const ModelBundle& bundle, const std::string& algo,
                         const std::string& text) {
  const std::string& chosen = algo.empty() ? bundle.default_algo : algo;
  if (!is_known_algorithm(chosen)) throw IntentError("unknown algorithm: " + chosen);
  if (chosen == "cnn") {
    if (!bundle.cnn) throw AlgorithmUnavailable("cnn");
    return predict(*bundle.cnn, text, bundle.table);
  }
  if (chosen == "rnn") {
    if (!bundle.rnn) throw AlgorithmUnavailable("rnn");
    return predict(*bundle.rnn, text, bundle.table);
  }
  if (chosen == "knn") {
    return knn_classify(text, bundle.exemplars, bundle.table, bundle.knn_k);
  }
  return fuzzy_classify(text, bundle.exemplars);
}

}  // namespace kasper::intent
