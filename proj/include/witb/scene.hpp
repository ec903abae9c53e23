#pragma once
// Structured scene representation: the hidden objects, the boxes and the
// per-box audio classifier posteriors. Lengths are centimeters, weights grams.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace witb {

using Vec3 = std::array<double, 3>;

// Tolerance on the sum of each audio posterior row.
inline constexpr double kAudioRowTolerance = 1e-6;

// Normally distributed extents: per-axis mean and standard deviation.
struct UncertainDims {
    Vec3 mean{};
    Vec3 std{};

    bool operator==(const UncertainDims&) const = default;
};

struct Measure {
    double mean = 0.0;
    double std = 0.0;

    bool operator==(const Measure&) const = default;
};

struct ObjectSpec {
    std::string name;
    UncertainDims dims;
    Measure weight_g;
    std::string material;
    // Fraction of each nominal extent the object can be compressed to, in (0, 1].
    double rigidity = 1.0;

    bool operator==(const ObjectSpec&) const = default;
};

struct BoxSpec {
    std::string id;
    std::string label;
    UncertainDims dims;

    bool operator==(const BoxSpec&) const = default;
};

// Audio classifier output: rows[box id][j] = P(labels[j] | audio of that box).
struct AudioPosterior {
    std::vector<std::string> labels;
    std::map<std::string, std::vector<double>> rows;

    bool operator==(const AudioPosterior&) const = default;
};

struct ParsedScene {
    std::string scenario_id;
    std::vector<ObjectSpec> objects;
    std::vector<BoxSpec> boxes;
    AudioPosterior audio;

    std::size_t object_count() const noexcept { return objects.size(); }
    std::size_t box_count() const noexcept { return boxes.size(); }

    bool operator==(const ParsedScene&) const = default;
};

struct Violation {
    std::string path;
    std::string message;

    bool operator==(const Violation&) const = default;
};

std::string to_string(const Violation& v);

// Thrown by load_scene. what() lists every problem, one per line, each prefixed
// with the document path it concerns.
class SceneError : public std::runtime_error {
public:
    explicit SceneError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

// Every invariant violation in the scene, in document order. Empty when valid.
std::vector<Violation> validate_scene(const ParsedScene& scene);

// Parses and validates a scene document. Unknown keys are reported through
// `warnings` (when given) and otherwise ignored.
ParsedScene load_scene(std::string_view text, std::vector<std::string>* warnings = nullptr);

// Reads a file and forwards to load_scene. I/O failures surface as SceneError
// with the file path as the violation path.
ParsedScene load_scene_file(const std::filesystem::path& path,
                            std::vector<std::string>* warnings = nullptr);

// Canonical document text: fixed key order, boxes' audio rows in box order,
// doubles printed with round-trip precision.
std::string serialize_scene(const ParsedScene& scene);

// Audio probabilities re-indexed by scene order: result[box][object]. The scene
// must be valid.
std::vector<std::vector<double>> audio_matrix(const ParsedScene& scene);

}  // namespace witb
