#include "topohd/report.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "topohd/container.hpp"

namespace topohd {

namespace {

using nlohmann::ordered_json;

ordered_json matrix_json(const std::vector<std::size_t>& m, std::size_t classes) {
  ordered_json rows = ordered_json::array();
  for (std::size_t r = 0; r < classes; ++r) {
    rows.push_back(std::vector<std::size_t>(m.begin() + static_cast<std::ptrdiff_t>(r * classes),
                                            m.begin() + static_cast<std::ptrdiff_t>((r + 1) * classes)));
  }
  return rows;
}

ordered_json model_json(const ModelResult& r, std::size_t classes) {
  return {{"accuracy_before", r.before},
          {"accuracy_after", r.after},
          {"confusion_before", matrix_json(r.confusion_before, classes)},
          {"confusion_after", matrix_json(r.confusion_after, classes)}};
}

std::string file_label(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.' && c != '_') c = '_';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace

std::string report_json(const RunReport& report, bool include_runtime) {
  ordered_json j;
  j["software"] = {{"name", "topohd"}, {"version", report.version}};
  ordered_json config;
  for (const auto& [k, v] : report.config.entries(false)) config[k] = v;
  j["config"] = config;
  j["data"] = {{"classes", report.classes},
               {"train", report.train_count},
               {"validation", report.val_count},
               {"test", report.test_count},
               {"test_class_counts", report.test_class_counts}};
  if (report.has_topo) {
    j["fusion"] = {{"before", {{"alpha", report.weights_before.alpha}, {"beta", report.weights_before.beta},
                               {"val_accuracy", report.val_accuracy_before}}},
                   {"after", {{"alpha", report.weights_after.alpha}, {"beta", report.weights_after.beta},
                              {"val_accuracy", report.val_accuracy_after}}}};
    j["online_updates"]["topo"] = {{"hog", report.topo_updates[kHog]},
                                   {"zernike", report.topo_updates[kZernike]},
                                   {"holes", report.topo_updates[kHoles]}};
  }
  if (report.has_naive) j["online_updates"]["naive"] = report.naive_updates;
  ordered_json settings = ordered_json::array();
  for (const auto& s : report.settings) {
    ordered_json e;
    e["setting"] = s.spec.label();
    e["corruption"] = s.spec.to_string();
    if (s.has_naive) e["naive"] = model_json(s.naive, report.classes);
    if (s.has_topo) e["topo"] = model_json(s.topo, report.classes);
    settings.push_back(e);
  }
  j["settings"] = settings;
  if (include_runtime) {
    ordered_json timing;
    for (const auto& [stage, s] : report.timing.seconds) timing[stage] = s;
    j["runtime"] = {{"workers", report.config.resolved_workers()},
                    {"mnist_dir", report.config.mnist_dir},
                    {"emnist_dir", report.config.emnist_dir},
                    {"output_dir", report.config.output_dir},
                    {"timing_seconds", timing}};
  }
  return j.dump(2) + "\n";
}

std::string accuracy_csv(const RunReport& report) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "setting,naive_before,naive_after,topo_before,topo_after\n";
  for (const auto& s : report.settings) {
    out << s.spec.label();
    for (const auto& [has, r] : {std::pair{s.has_naive, &s.naive}, std::pair{s.has_topo, &s.topo}}) {
      if (has) out << ',' << r->before << ',' << r->after;
      else out << ",,";
    }
    out << '\n';
  }
  return out.str();
}

std::string confusion_csv(const std::vector<std::size_t>& matrix, std::size_t classes) {
  std::ostringstream out;
  out << "true\\pred";
  for (std::size_t c = 0; c < classes; ++c) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < classes; ++r) {
    out << r;
    for (std::size_t c = 0; c < classes; ++c) out << ',' << matrix.at(r * classes + c);
    out << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    files.push_back(dir / name);
    write_text(files.back(), text);
  };
  emit("report.json", report_json(report, true));
  emit("accuracy.csv", accuracy_csv(report));
  for (const auto& s : report.settings) {
    const std::string label = file_label(s.spec.label());
    if (s.has_naive) {
      emit("confusion_" + label + "_naive_before.csv", confusion_csv(s.naive.confusion_before, report.classes));
      emit("confusion_" + label + "_naive_after.csv", confusion_csv(s.naive.confusion_after, report.classes));
    }
    if (s.has_topo) {
      emit("confusion_" + label + "_topo_before.csv", confusion_csv(s.topo.confusion_before, report.classes));
      emit("confusion_" + label + "_topo_after.csv", confusion_csv(s.topo.confusion_after, report.classes));
    }
  }
  return files;
}

// ---------------------------------------------------------------------------
// Models

namespace {

std::vector<std::uint8_t> section(const auto& fill) {
  ByteWriter w;
  fill(w);
  return w.bytes();
}

template <typename Fn>
auto read_section(const Container& c, std::string_view tag, Fn&& fn) {
  ByteReader r(c.get(tag));
  auto value = fn(r);
  if (!r.done()) throw std::runtime_error("model section " + std::string(tag) + ": trailing bytes at offset " + std::to_string(r.offset()));
  return value;
}

}  // namespace

void save_model(const SavedModel& model, const std::filesystem::path& path) {
  Container c;
  c.put("CONF", section([&](ByteWriter& w) {
    const auto entries = model.config.entries(false);
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& [k, v] : entries) {
      w.str(k);
      w.str(v);
    }
  }));
  if (model.has_topo) {
    const auto& t = model.topo;
    c.put("PHOG", section([&](ByteWriter& w) { write_projection(w, t.encoders.hog); }));
    c.put("PZER", section([&](ByteWriter& w) { write_projection(w, t.encoders.zernike); }));
    c.put("HSET", section([&](ByteWriter& w) { write_hole_encoder(w, t.encoders.holes); }));
    const char* before[kChannels] = {"BHOG", "BZER", "BHOL"};
    const char* after[kChannels] = {"AHOG", "AZER", "AHOL"};
    for (std::size_t k = 0; k < kChannels; ++k) {
      c.put(before[k], section([&](ByteWriter& w) { write_bank(w, t.before[k]); }));
      c.put(after[k], section([&](ByteWriter& w) { write_bank(w, t.after[k]); }));
    }
    c.put("FUSE", section([&](ByteWriter& w) {
      w.f64(t.search_before.weights.alpha);
      w.f64(t.search_before.weights.beta);
      w.f64(t.search_before.accuracy);
      w.f64(t.search_after.weights.alpha);
      w.f64(t.search_after.weights.beta);
      w.f64(t.search_after.accuracy);
    }));
  }
  if (model.has_naive) {
    const auto& n = model.naive;
    c.put("NAIV", section([&](ByteWriter& w) {
      w.u64(n.encoder.dim());
      w.u64(n.encoder.height());
      w.u64(n.encoder.width());
      w.u64(n.encoder.levels().levels());
      w.u64(n.encoder.seed());
    }));
    c.put("BPIX", section([&](ByteWriter& w) { write_bank(w, n.before); }));
    c.put("APIX", section([&](ByteWriter& w) { write_bank(w, n.after); }));
  }
  c.save(path.string());
}

SavedModel load_model(const std::filesystem::path& path) {
  const Container c = Container::load(path.string());
  SavedModel m;
  read_section(c, "CONF", [&](ByteReader& r) {
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::string k = r.str();
      const std::string v = r.str();
      m.config.set(k, v);
    }
    return 0;
  });
  m.has_topo = c.has("PHOG");
  if (m.has_topo) {
    auto& t = m.topo;
    t.encoders.hog = read_section(c, "PHOG", [](ByteReader& r) { return read_projection(r); });
    t.encoders.zernike = read_section(c, "PZER", [](ByteReader& r) { return read_projection(r); });
    t.encoders.holes = read_section(c, "HSET", [](ByteReader& r) { return read_hole_encoder(r); });
    t.encoders.roles = TopoEncoders::make_roles(m.config);
    const char* before[kChannels] = {"BHOG", "BZER", "BHOL"};
    const char* after[kChannels] = {"AHOG", "AZER", "AHOL"};
    for (std::size_t k = 0; k < kChannels; ++k) {
      t.before[k] = read_section(c, before[k], [](ByteReader& r) { return read_bank(r); });
      t.after[k] = read_section(c, after[k], [](ByteReader& r) { return read_bank(r); });
    }
    read_section(c, "FUSE", [&](ByteReader& r) {
      t.search_before.weights.alpha = r.f64();
      t.search_before.weights.beta = r.f64();
      t.search_before.accuracy = r.f64();
      t.search_after.weights.alpha = r.f64();
      t.search_after.weights.beta = r.f64();
      t.search_after.accuracy = r.f64();
      return 0;
    });
  }
  m.has_naive = c.has("NAIV");
  if (m.has_naive) {
    auto& n = m.naive;
    n.encoder = read_section(c, "NAIV", [](ByteReader& r) {
      const auto dim = r.u64(), h = r.u64(), w = r.u64(), levels = r.u64(), seed = r.u64();
      return NaiveEncoder(dim, h, w, levels, seed);
    });
    n.before = read_section(c, "BPIX", [](ByteReader& r) { return read_bank(r); });
    n.after = read_section(c, "APIX", [](ByteReader& r) { return read_bank(r); });
  }
  return m;
}

}  // namespace topohd
