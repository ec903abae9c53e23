#include "witb/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace witb {

namespace {

using nlohmann::json;

std::string join_violations(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += '\n';
        out += to_string(v);
    }
    return out;
}

std::string fmt_number(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

// Walks the parsed JSON tree, recording structural problems instead of
// stopping at the first one.
class DocumentReader {
public:
    DocumentReader(std::vector<Violation>& errors, std::vector<std::string>* warnings)
        : errors_(errors), warnings_(warnings) {}

    void fail(std::string path, std::string message) {
        errors_.push_back({std::move(path), std::move(message)});
    }

    void check_keys(const json& obj, const std::string& path,
                    std::initializer_list<std::string_view> known) {
        for (const auto& [key, value] : obj.items()) {
            if (std::find(known.begin(), known.end(), key) != known.end()) continue;
            if (warnings_) {
                warnings_->push_back(path + (path.empty() ? "" : ".") + key +
                                     ": unknown field ignored");
            }
        }
    }

    const json* member(const json& obj, const std::string& path, const char* key) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            fail(join(path, key), "missing required field");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::string> string_field(const json& obj, const std::string& path,
                                            const char* key) {
        const json* v = member(obj, path, key);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail(join(path, key), "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<double> number(const json& v, const std::string& path) {
        if (!v.is_number()) {
            fail(path, "expected a number");
            return std::nullopt;
        }
        return v.get<double>();
    }

    std::optional<double> number_field(const json& obj, const std::string& path,
                                       const char* key) {
        const json* v = member(obj, path, key);
        if (!v) return std::nullopt;
        return number(*v, join(path, key));
    }

    std::optional<Vec3> vec3_field(const json& obj, const std::string& path, const char* key) {
        const json* v = member(obj, path, key);
        if (!v) return std::nullopt;
        const std::string here = join(path, key);
        if (!v->is_array() || v->size() != 3) {
            fail(here, "expected an array of 3 numbers");
            return std::nullopt;
        }
        Vec3 out{};
        bool ok = true;
        for (std::size_t i = 0; i < 3; ++i) {
            auto x = number((*v)[i], here + "[" + std::to_string(i) + "]");
            if (x) {
                out[i] = *x;
            } else {
                ok = false;
            }
        }
        return ok ? std::optional<Vec3>(out) : std::nullopt;
    }

    std::optional<UncertainDims> dims_field(const json& obj, const std::string& path) {
        const json* v = member(obj, path, "dims");
        if (!v) return std::nullopt;
        const std::string here = join(path, "dims");
        if (!v->is_object()) {
            fail(here, "expected an object");
            return std::nullopt;
        }
        check_keys(*v, here, {"mean", "std"});
        auto mean = vec3_field(*v, here, "mean");
        auto sd = vec3_field(*v, here, "std");
        if (!mean || !sd) return std::nullopt;
        return UncertainDims{*mean, *sd};
    }

    std::optional<Measure> measure_field(const json& obj, const std::string& path,
                                         const char* key) {
        const json* v = member(obj, path, key);
        if (!v) return std::nullopt;
        const std::string here = join(path, key);
        if (!v->is_object()) {
            fail(here, "expected an object");
            return std::nullopt;
        }
        check_keys(*v, here, {"mean", "std"});
        auto mean = number_field(*v, here, "mean");
        auto sd = number_field(*v, here, "std");
        if (!mean || !sd) return std::nullopt;
        return Measure{*mean, *sd};
    }

    static std::string join(const std::string& path, const char* key) {
        return path.empty() ? std::string(key) : path + "." + key;
    }

private:
    std::vector<Violation>& errors_;
    std::vector<std::string>* warnings_;
};

ParsedScene read_document(const json& doc, std::vector<std::string>* warnings) {
    std::vector<Violation> errors;
    DocumentReader r(errors, warnings);
    ParsedScene scene;

    if (!doc.is_object()) {
        throw SceneError(std::vector<Violation>{{"$", "scene document must be a JSON object"}});
    }
    r.check_keys(doc, "", {"scenario_id", "objects", "boxes", "audio_posterior"});

    if (auto id = r.string_field(doc, "", "scenario_id")) scene.scenario_id = *id;

    if (const json* objects = r.member(doc, "", "objects")) {
        if (!objects->is_array()) {
            r.fail("objects", "expected an array");
        } else {
            for (std::size_t i = 0; i < objects->size(); ++i) {
                const json& o = (*objects)[i];
                const std::string path = "objects[" + std::to_string(i) + "]";
                if (!o.is_object()) {
                    r.fail(path, "expected an object");
                    continue;
                }
                r.check_keys(o, path, {"name", "dims", "weight_g", "material", "rigidity"});
                ObjectSpec spec;
                auto name = r.string_field(o, path, "name");
                auto dims = r.dims_field(o, path);
                auto weight = r.measure_field(o, path, "weight_g");
                auto material = r.string_field(o, path, "material");
                auto rigidity = r.number_field(o, path, "rigidity");
                if (!name || !dims || !weight || !material || !rigidity) continue;
                spec.name = *name;
                spec.dims = *dims;
                spec.weight_g = *weight;
                spec.material = *material;
                spec.rigidity = *rigidity;
                scene.objects.push_back(std::move(spec));
            }
        }
    }

    if (const json* boxes = r.member(doc, "", "boxes")) {
        if (!boxes->is_array()) {
            r.fail("boxes", "expected an array");
        } else {
            for (std::size_t i = 0; i < boxes->size(); ++i) {
                const json& b = (*boxes)[i];
                const std::string path = "boxes[" + std::to_string(i) + "]";
                if (!b.is_object()) {
                    r.fail(path, "expected an object");
                    continue;
                }
                r.check_keys(b, path, {"id", "label", "dims"});
                auto id = r.string_field(b, path, "id");
                auto label = r.string_field(b, path, "label");
                auto dims = r.dims_field(b, path);
                if (!id || !label || !dims) continue;
                scene.boxes.push_back({*id, *label, *dims});
            }
        }
    }

    if (const json* audio = r.member(doc, "", "audio_posterior")) {
        const std::string path = "audio_posterior";
        if (!audio->is_object()) {
            r.fail(path, "expected an object");
        } else {
            r.check_keys(*audio, path, {"labels", "rows"});
            if (const json* labels = r.member(*audio, path, "labels")) {
                if (!labels->is_array()) {
                    r.fail(path + ".labels", "expected an array of strings");
                } else {
                    for (std::size_t i = 0; i < labels->size(); ++i) {
                        const json& l = (*labels)[i];
                        if (!l.is_string()) {
                            r.fail(path + ".labels[" + std::to_string(i) + "]",
                                   "expected a string");
                            continue;
                        }
                        scene.audio.labels.push_back(l.get<std::string>());
                    }
                }
            }
            if (const json* rows = r.member(*audio, path, "rows")) {
                if (!rows->is_object()) {
                    r.fail(path + ".rows", "expected an object keyed by box id");
                } else {
                    for (const auto& [box_id, row] : rows->items()) {
                        const std::string here = path + ".rows." + box_id;
                        if (!row.is_array()) {
                            r.fail(here, "expected an array of numbers");
                            continue;
                        }
                        std::vector<double> values;
                        bool ok = true;
                        for (std::size_t j = 0; j < row.size(); ++j) {
                            auto x = r.number(row[j], here + "[" + std::to_string(j) + "]");
                            if (x) {
                                values.push_back(*x);
                            } else {
                                ok = false;
                            }
                        }
                        if (ok) scene.audio.rows.emplace(box_id, std::move(values));
                    }
                }
            }
        }
    }

    if (!errors.empty()) throw SceneError(std::move(errors));
    return scene;
}

void check_dims(const UncertainDims& dims, const std::string& path, std::vector<Violation>& out) {
    for (std::size_t i = 0; i < 3; ++i) {
        const double m = dims.mean[i];
        if (!std::isfinite(m) || m <= 0.0) {
            out.push_back({path + ".mean[" + std::to_string(i) + "]",
                           "dimension mean must be finite and > 0, got " + fmt_number(m)});
        }
        const double s = dims.std[i];
        if (!std::isfinite(s) || s < 0.0) {
            out.push_back({path + ".std[" + std::to_string(i) + "]",
                           "dimension std must be finite and >= 0, got " + fmt_number(s)});
        }
    }
}

}  // namespace

std::string to_string(const Violation& v) { return v.path + ": " + v.message; }

SceneError::SceneError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

std::vector<Violation> validate_scene(const ParsedScene& scene) {
    std::vector<Violation> out;

    if (scene.objects.empty()) out.push_back({"objects", "scene needs at least one object"});
    if (scene.boxes.empty()) out.push_back({"boxes", "scene needs at least one box"});

    std::set<std::string> names;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const ObjectSpec& o = scene.objects[i];
        const std::string path = "objects[" + std::to_string(i) + "]";
        if (o.name.empty()) {
            out.push_back({path + ".name", "object name must be non-empty"});
        } else if (!names.insert(o.name).second) {
            out.push_back({path + ".name", "duplicate object name '" + o.name + "'"});
        }
        check_dims(o.dims, path + ".dims", out);
        if (!std::isfinite(o.weight_g.mean) || o.weight_g.mean <= 0.0) {
            out.push_back({path + ".weight_g.mean", "object '" + o.name +
                                                        "': weight mean must be > 0, got " +
                                                        fmt_number(o.weight_g.mean)});
        }
        if (!std::isfinite(o.weight_g.std) || o.weight_g.std < 0.0) {
            out.push_back({path + ".weight_g.std", "object '" + o.name +
                                                       "': weight std must be >= 0, got " +
                                                       fmt_number(o.weight_g.std)});
        }
        if (!(o.rigidity > 0.0 && o.rigidity <= 1.0)) {
            out.push_back({path + ".rigidity", "object '" + o.name +
                                                   "': rigidity must lie in (0, 1], got " +
                                                   fmt_number(o.rigidity)});
        }
    }

    std::set<std::string> ids;
    for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
        const BoxSpec& b = scene.boxes[i];
        const std::string path = "boxes[" + std::to_string(i) + "]";
        if (b.id.empty()) {
            out.push_back({path + ".id", "box id must be non-empty"});
        } else if (!ids.insert(b.id).second) {
            out.push_back({path + ".id", "duplicate box id '" + b.id + "'"});
        }
        check_dims(b.dims, path + ".dims", out);
    }

    const AudioPosterior& audio = scene.audio;
    std::set<std::string> labels;
    for (const std::string& label : audio.labels) labels.insert(label);
    std::string unlabeled;
    for (const ObjectSpec& o : scene.objects) {
        if (!o.name.empty() && !labels.contains(o.name)) {
            unlabeled += (unlabeled.empty() ? "'" : ", '") + o.name + "'";
        }
    }
    // A misspelled label is one fault, so it is reported once together with
    // the objects left without a label.
    bool unknown_label = false;
    labels.clear();
    for (std::size_t j = 0; j < audio.labels.size(); ++j) {
        const std::string& label = audio.labels[j];
        const std::string path = "audio_posterior.labels[" + std::to_string(j) + "]";
        if (!labels.insert(label).second) {
            out.push_back({path, "duplicate label '" + label + "'"});
        } else if (!names.contains(label)) {
            unknown_label = true;
            out.push_back({path, "label '" + label + "' does not match any object" +
                                     (unlabeled.empty() ? "" : " (unlabeled: " + unlabeled + ")")});
        }
    }
    if (!unknown_label && !unlabeled.empty()) {
        out.push_back({"audio_posterior.labels", "no label for object " + unlabeled});
    }

    for (const BoxSpec& b : scene.boxes) {
        if (!b.id.empty() && !audio.rows.contains(b.id)) {
            out.push_back({"audio_posterior.rows", "box '" + b.id + "' has no audio row"});
        }
    }
    for (const auto& [box_id, row] : audio.rows) {
        const std::string path = "audio_posterior.rows." + box_id;
        if (!ids.contains(box_id)) {
            out.push_back({path, "row for unknown box '" + box_id + "'"});
        }
        if (row.size() != audio.labels.size()) {
            out.push_back({path, "box '" + box_id + "': row has " + std::to_string(row.size()) +
                                     " entries, expected one per label (" +
                                     std::to_string(audio.labels.size()) + ")"});
        }
        double sum = 0.0;
        bool entries_ok = true;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (!std::isfinite(row[j]) || row[j] < 0.0) {
                out.push_back({path + "[" + std::to_string(j) + "]",
                               "box '" + box_id + "': probability must be finite and >= 0, got " +
                                   fmt_number(row[j])});
                entries_ok = false;
            }
            sum += row[j];
        }
        if (entries_ok && std::abs(sum - 1.0) > kAudioRowTolerance) {
            out.push_back({path, "box '" + box_id + "': row sums to " + fmt_number(sum) +
                                     ", expected 1 within 1e-6"});
        }
    }
    return out;
}

ParsedScene load_scene(std::string_view text, std::vector<std::string>* warnings) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw SceneError(std::vector<Violation>{{"$", std::string("malformed document: ") + e.what()}});
    }
    ParsedScene scene = read_document(doc, warnings);
    auto violations = validate_scene(scene);
    if (!violations.empty()) throw SceneError(std::move(violations));
    return scene;
}

ParsedScene load_scene_file(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SceneError(std::vector<Violation>{{path.string(), "cannot open scene file"}});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return load_scene(buffer.str(), warnings);
    } catch (const SceneError& e) {
        std::vector<Violation> qualified;
        for (const auto& v : e.violations()) {
            qualified.push_back({path.string() + ":" + v.path, v.message});
        }
        throw SceneError(std::move(qualified));
    }
}

std::string serialize_scene(const ParsedScene& scene) {
    nlohmann::ordered_json doc;
    doc["scenario_id"] = scene.scenario_id;
    doc["objects"] = nlohmann::ordered_json::array();
    for (const ObjectSpec& o : scene.objects) {
        nlohmann::ordered_json obj;
        obj["name"] = o.name;
        obj["dims"] = {{"mean", o.dims.mean}, {"std", o.dims.std}};
        obj["weight_g"] = {{"mean", o.weight_g.mean}, {"std", o.weight_g.std}};
        obj["material"] = o.material;
        obj["rigidity"] = o.rigidity;
        doc["objects"].push_back(std::move(obj));
    }
    doc["boxes"] = nlohmann::ordered_json::array();
    for (const BoxSpec& b : scene.boxes) {
        nlohmann::ordered_json box;
        box["id"] = b.id;
        box["label"] = b.label;
        box["dims"] = {{"mean", b.dims.mean}, {"std", b.dims.std}};
        doc["boxes"].push_back(std::move(box));
    }
    nlohmann::ordered_json rows = nlohmann::ordered_json::object();
    for (const BoxSpec& b : scene.boxes) {
        if (auto it = scene.audio.rows.find(b.id); it != scene.audio.rows.end()) {
            rows[b.id] = it->second;
        }
    }
    // Rows for ids that are not boxes only exist in invalid scenes; keep them
    // so serialization stays lossless.
    for (const auto& [id, row] : scene.audio.rows) {
        if (!rows.contains(id)) rows[id] = row;
    }
    doc["audio_posterior"] = {{"labels", scene.audio.labels}, {"rows", std::move(rows)}};
    return doc.dump(2) + "\n";
}

std::vector<std::vector<double>> audio_matrix(const ParsedScene& scene) {
    std::map<std::string, std::size_t> column;
    for (std::size_t j = 0; j < scene.audio.labels.size(); ++j) column[scene.audio.labels[j]] = j;

    std::vector<std::vector<double>> out(scene.box_count(),
                                         std::vector<double>(scene.object_count(), 0.0));
    for (std::size_t b = 0; b < scene.box_count(); ++b) {
        const auto& row = scene.audio.rows.at(scene.boxes[b].id);
        for (std::size_t o = 0; o < scene.object_count(); ++o) {
            out[b][o] = row.at(column.at(scene.objects[o].name));
        }
    }
    return out;
}

}  // namespace witb
