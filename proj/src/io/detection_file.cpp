#include "salisa/io/detection_file.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include <json.hpp>

#include "salisa/errors.hpp"
#include "salisa/io/atomic_write.hpp"

namespace salisa::io {

using nlohmann::json;

std::string format_grid_id(std::uint64_t id) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(id));
  return buf;
}

std::vector<Detection> DetectionFile::detections_for(int image_id) const {
  std::vector<Detection> out;
  for (const auto& e : detections) {
    if (e.image_id == image_id) out.push_back(e.detection);
  }
  return out;
}

std::vector<Detection> DetectionFile::all_detections() const {
  std::vector<Detection> out;
  out.reserve(detections.size());
  for (const auto& e : detections) out.push_back(e.detection);
  return out;
}

const ImageEntry* DetectionFile::find_image(int id) const {
  const auto it = std::find_if(images.begin(), images.end(), [id](const ImageEntry& e) { return e.id == id; });
  return it == images.end() ? nullptr : &*it;
}

namespace {

std::uint64_t parse_hex_id(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad grid_id '" + s + "'");
  return v;
}

DetectionEntry parse_entry(const json& j) {
  DetectionEntry e;
  e.image_id = j.value("image_id", 0);
  const auto& bbox = j.at("bbox");
  if (!bbox.is_array() || bbox.size() != 4) throw FormatError("bbox must be [x, y, w, h]");
  const double x = bbox[0].get<double>();
  const double y = bbox[1].get<double>();
  const double w = bbox[2].get<double>();
  const double h = bbox[3].get<double>();
  if (!(w > 0.0 && h > 0.0)) throw FormatError("bbox width and height must be positive");
  e.detection.box = {x, y, x + w, y + h};
  e.detection.score = j.value("score", 1.0);
  if (!(e.detection.score >= 0.0 && e.detection.score <= 1.0)) throw FormatError("score outside [0,1]");
  e.detection.category = j.value("category_id", 0);
  const std::string space = j.value("space", std::string("original"));
  if (space == "resampled") {
    e.detection.space = CoordinateSpace::resampled(parse_hex_id(j.at("grid_id").get<std::string>()));
  } else if (space != "original") {
    throw FormatError("unknown space '" + space + "'");
  }
  return e;
}

json entry_json(const DetectionEntry& e) {
  const auto& b = e.detection.box;
  json j = {{"image_id", e.image_id},
            {"bbox", {b.x_min, b.y_min, b.x_max - b.x_min, b.y_max - b.y_min}},
            {"score", e.detection.score},
            {"category_id", e.detection.category}};
  if (e.detection.space.kind == SpaceKind::Resampled) {
    j["space"] = "resampled";
    j["grid_id"] = format_grid_id(e.detection.space.grid_id);
  }
  return j;
}

}  // namespace

DetectionFile parse_detection_file(std::string_view text, bool require_images) {
  DetectionFile out;
  try {
    const json doc = json::parse(text);
    const json* dets = nullptr;
    if (doc.is_array()) {
      dets = &doc;
    } else {
      if (!doc.is_object()) throw FormatError("detection document must be an object or array");
      if (doc.contains("images")) {
        for (const auto& im : doc.at("images")) {
          out.images.push_back({im.at("id").get<int>(), im.value("file", std::string()), im.value("width", 0),
                                im.value("height", 0)});
        }
      }
      if (doc.contains("detections")) dets = &doc.at("detections");
    }
    if (dets) {
      for (const auto& d : *dets) out.detections.push_back(parse_entry(d));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("detection JSON: ") + e.what());
  }
  if (require_images) {
    for (const auto& d : out.detections) {
      if (!out.find_image(d.image_id)) throw FormatError("image_id " + std::to_string(d.image_id) + " not in images");
    }
  }
  return out;
}

std::string serialize(const DetectionFile& file) {
  json images = json::array();
  for (const auto& im : file.images) {
    images.push_back({{"id", im.id}, {"file", im.file}, {"width", im.width}, {"height", im.height}});
  }
  json dets = json::array();
  for (const auto& d : file.detections) dets.push_back(entry_json(d));
  json doc = {{"images", std::move(images)}, {"detections", std::move(dets)}};
  return doc.dump(2) + "\n";
}

DetectionFile read_detection_file(const std::filesystem::path& path, bool require_images) {
  return parse_detection_file(read_file(path), require_images);
}

void write_detection_file(const std::filesystem::path& path, const DetectionFile& file) {
  write_file_atomic(path, serialize(file));
}

std::map<int, std::vector<Detection>> detections_by_frame(const DetectionFile& file) {
  std::map<int, std::vector<Detection>> out;
  for (std::size_t k = 0; k < file.images.size(); ++k) {
    out[static_cast<int>(k)] = file.detections_for(file.images[k].id);
  }
  return out;
}

}  // namespace salisa::io
