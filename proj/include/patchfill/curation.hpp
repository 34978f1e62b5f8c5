#pragma once

#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "patchfill/image.hpp"
#include "patchfill/synthesis.hpp"

namespace pf {

struct AutoCropParams {
    double gamma = 1.05;  // growth factor per step
    double tau = 0.25;    // stop once hole fraction drops below this
    int base = 512;       // minimum square side

    void validate() const {
        PF_CHECK(gamma > 1.0, "crop growth factor must exceed 1");
        PF_CHECK(tau > 0.0 && tau < 1.0, "hole-fraction threshold must be in (0,1)");
        PF_CHECK(base >= 1, "minimum crop size must be positive");
    }
};

// Square centered on the hole bbox, grown until the hole occupies less than
// tau of its area or the side reaches an image axis; translated to fit, or
// widened to cover an axis the side exceeds (the rect is clipped to the image,
// so it is square except in that degenerate case).
CropRect auto_crop(const HoleMask& mask, const AutoCropParams& params = {});

struct PairwiseVerdict {
    double o1 = 0;  // prefer left
    double o2 = 0;  // tie
    double o3 = 0;  // prefer right
};

class Scorer {
  public:
    virtual ~Scorer() = default;
    // Must be deterministic for fixed inputs. No antisymmetry is assumed.
    virtual PairwiseVerdict judge(const PlaneImage& left, const PlaneImage& right,
                                  const HoleMask& mask) = 0;
    virtual std::string identity() const = 0;
};

// Antisymmetric pairwise preference matrix: entry (i,j) > 0 means candidate i
// is preferred over candidate j.
struct PreferenceMatrix {
    int n = 0;
    std::vector<double> m;  // row-major n*n

    double at(int i, int j) const { return m[static_cast<size_t>(i) * n + j]; }
    double& at(int i, int j) { return m[static_cast<size_t>(i) * n + j]; }
};

// One scorer call per unordered pair, (left, right) = (crop_i, crop_j) for
// i < j; the preferred side's row gets the positive entry and antisymmetry is
// enforced by construction. Calls may run concurrently; assembly order is
// fixed. A scorer failure aborts with the pair identity.
PreferenceMatrix build_matrix(const std::vector<PlaneImage>& crops, const HoleMask& mask,
                              Scorer& scorer, int threads = 1);

// p_i = (sum_j M_ij) / n
std::vector<double> preference_vector(const PreferenceMatrix& matrix);

struct SelectionParams {
    AutoCropParams crop;
    int scorer_size = 512;  // crops are resized to this square for the scorer
    int threads = 1;

    void validate() const {
        crop.validate();
        PF_CHECK(scorer_size >= 8, "scorer input size too small");
        PF_CHECK(threads >= 1, "threads must be positive");
    }
};

struct CurationReport {
    PreferenceMatrix matrix;
    std::vector<double> preference;
    CropRect crop;
    std::string scorer_identity;
    int winner = 0;
};

struct SelectionResult {
    PlaneImage winner;
    GuideCombo combo;
    CurationReport report;
};

// Auto-crops once on the mask, scores every candidate pair on identically
// cropped-and-resized inputs, and picks the argmax of the preference vector
// (ties go to the lowest combo index).
SelectionResult select(const CandidateSet& candidates, const HoleMask& mask, Scorer& scorer,
                       const SelectionParams& params = {});

// Built-in reference-free scorer: per-image realism penalty from boundary seam
// discontinuity, hole-to-context patch incoherence, and relative hole blur,
// turned into a three-way verdict by a softmax over the penalty difference.
class HeuristicScorer : public Scorer {
  public:
    struct Params {
        double seam_weight = 1.0;
        double incoherence_weight = 1.0;
        double blur_weight = 0.5;
        double temperature = 0.1;
    };

    HeuristicScorer() = default;
    explicit HeuristicScorer(const Params& params) : params_(params) {}

    PairwiseVerdict judge(const PlaneImage& left, const PlaneImage& right,
                          const HoleMask& mask) override;
    std::string identity() const override { return "heuristic"; }

    // Exposed so the penalty can be probed directly.
    double penalty(const PlaneImage& img, const HoleMask& mask);

  private:
    Params params_;
    std::mutex mu_;
    std::unordered_map<uint64_t, double> cache_;
};

// Wraps an external command: writes left.png / right.png / mask.png into a
// fresh temp directory, runs `command <dir>`, and parses three probabilities
// from stdout. Any failure raises ScorerError.
class CommandScorer : public Scorer {
  public:
    explicit CommandScorer(std::string command) : command_(std::move(command)) {}

    PairwiseVerdict judge(const PlaneImage& left, const PlaneImage& right,
                          const HoleMask& mask) override;
    std::string identity() const override { return "cmd:" + command_; }

  private:
    std::string command_;
};

}  // namespace pf
