#include "fgssl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fgssl/errors.hpp"
#include "fgssl/rng.hpp"

namespace fs = std::filesystem;

namespace fgssl {

Dataset load_directory(const std::string& path) {
  if (!fs::is_directory(path)) throw IoError("not a dataset directory: " + path);
  std::vector<std::string> class_dirs;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw IoError("no class directories under " + path);

  struct Pending {
    std::string file;
    std::string stem;
    int64_t label;
  };
  std::vector<Pending> files;
  for (size_t label = 0; label < class_dirs.size(); ++label) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(fs::path(path) / class_dirs[label])) {
      if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
        names.push_back(entry.path().filename().string());
      }
    }
    if (names.empty()) throw IoError("empty class directory " + class_dirs[label] + " under " + path);
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
      files.push_back({(fs::path(path) / class_dirs[label] / name).string(),
                       fs::path(name).stem().string(), static_cast<int64_t>(label)});
    }
  }

  const bool all_numeric = std::all_of(files.begin(), files.end(), [](const Pending& p) {
    return !p.stem.empty() && std::all_of(p.stem.begin(), p.stem.end(),
                                          [](unsigned char c) { return std::isdigit(c); });
  });

  Dataset ds;
  ds.num_classes = static_cast<int64_t>(class_dirs.size());
  for (size_t i = 0; i < files.size(); ++i) {
    Sample s;
    s.image = read_pixmap(files[i].file);
    s.label = files[i].label;
    s.id = all_numeric ? std::stoll(files[i].stem) : static_cast<int64_t>(i);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset split_semi_supervised(const Dataset& train, const SplitSpec& spec) {
  if (!(spec.label_fraction > 0.0 && spec.label_fraction <= 1.0)) {
    throw ConfigError("label fraction must lie in (0,1], got " + std::to_string(spec.label_fraction));
  }
  if (spec.label_fraction == 1.0) return train;

  std::vector<std::vector<int64_t>> by_class(static_cast<size_t>(train.num_classes));
  for (int64_t i = 0; i < train.size(); ++i) {
    const int64_t label = train.samples[static_cast<size_t>(i)].label;
    FGSSL_CHECK(label >= 0 && label < train.num_classes, "split: label out of range");
    by_class[static_cast<size_t>(label)].push_back(i);
  }

  std::vector<int64_t> picked;
  for (int64_t c = 0; c < train.num_classes; ++c) {
    auto& members = by_class[static_cast<size_t>(c)];
    if (members.empty()) continue;
    const int64_t want = std::max<int64_t>(
        1, std::llround(spec.label_fraction * static_cast<double>(members.size())));
    Rng rng(derive_stream(spec.seed, {stream::kSplit, static_cast<uint64_t>(c)}));
    rng.shuffle(members);
    for (int64_t i = 0; i < want; ++i) picked.push_back(members[static_cast<size_t>(i)]);
  }
  std::sort(picked.begin(), picked.end());

  Dataset out;
  out.num_classes = train.num_classes;
  out.split_tag = train.split_tag;
  for (int64_t i : picked) out.samples.push_back(train.samples[static_cast<size_t>(i)]);
  return out;
}

namespace {

std::string class_dir_name(int64_t label) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "class_%03lld", static_cast<long long>(label));
  return buf;
}

std::string sample_file_name(int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06lld.ppm", static_cast<long long>(id));
  return buf;
}

void save_split(const Dataset& ds, const fs::path& dir) {
  for (const Sample& s : ds.samples) {
    const fs::path cdir = dir / class_dir_name(s.label);
    std::error_code ec;
    fs::create_directories(cdir, ec);
    if (ec) throw IoError("cannot create " + cdir.string());
    write_pixmap((cdir / sample_file_name(s.id)).string(), s.image);
  }
}

}  // namespace

void save_dataset(const Dataset& train, const Dataset& test, const std::string& root) {
  save_split(train, fs::path(root) / "train");
  save_split(test, fs::path(root) / "test");
  std::ofstream manifest(fs::path(root) / "manifest.txt");
  if (!manifest) throw IoError("cannot write manifest under " + root);
  manifest << "# id split label r0 c0 r1 c1\n";
  auto emit = [&manifest](const Dataset& ds, const char* tag) {
    for (const Sample& s : ds.samples) {
      manifest << s.id << " " << tag << " " << s.label;
      if (s.glyph_box) {
        manifest << " " << s.glyph_box->r0 << " " << s.glyph_box->c0 << " " << s.glyph_box->r1
                 << " " << s.glyph_box->c1;
      }
      manifest << "\n";
    }
  };
  emit(train, "train");
  emit(test, "test");
  if (!manifest) throw IoError("manifest write failed under " + root);
}

std::pair<Dataset, Dataset> load_dataset_root(const std::string& root) {
  Dataset train = load_directory((fs::path(root) / "train").string());
  Dataset test = load_directory((fs::path(root) / "test").string());
  train.split_tag = "train";
  test.split_tag = "test";

  const fs::path manifest_path = fs::path(root) / "manifest.txt";
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot read " + manifest_path.string());
    std::map<int64_t, GlyphBox> boxes;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      int64_t id, label;
      std::string split;
      GlyphBox box;
      if (ss >> id >> split >> label) {
        if (ss >> box.r0 >> box.c0 >> box.r1 >> box.c1) boxes[id] = box;
      } else {
        throw IoError("malformed manifest line: " + line);
      }
    }
    for (Dataset* ds : {&train, &test}) {
      for (Sample& s : ds->samples) {
        auto it = boxes.find(s.id);
        if (it != boxes.end()) s.glyph_box = it->second;
      }
    }
  }
  return {train, test};
}

}  // namespace fgssl
