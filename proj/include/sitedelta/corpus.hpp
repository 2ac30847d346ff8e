#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sitedelta::corpus {

enum class Label { Phish, Legit, Homepage };

std::string label_name(Label label);

struct PageArtifact {
    std::string page_id;
    std::string html_path;
    std::string snapshot_path;
    std::string url;
    Label label = Label::Legit;
};

struct FamilyRecord {
    std::string family_id;
    PageArtifact homepage;               // label == Homepage
    std::vector<PageArtifact> pages;     // labels in {Phish, Legit}
    std::vector<std::string> homepage_aliases;
};

struct SplitPlan {
    struct Repetition {
        std::vector<std::string> train_family_ids;
        std::vector<std::string> test_family_ids;
    };
    std::vector<Repetition> repetitions;
    std::uint64_t seed = 0;
};

/// Loads and validates a corpus manifest (manifest.json schema, version 1).
/// Every referenced file must exist; snapshots must be PNG; member labels
/// must be "phish" or "legit". Registrable-domain mismatches inside a family
/// warn on stderr but do not fail.
std::vector<FamilyRecord> load_corpus(const std::string& manifest_path);

/// Family-wise train/test assignments: each repetition sends
/// round(train_fraction * N) families (clamped to keep both sides non-empty)
/// to training. Ordering ties break by sorting family ids first, so the
/// result is independent of load order.
SplitPlan make_splits(const std::vector<FamilyRecord>& families, double train_fraction,
                      int repetitions, std::uint64_t seed);

/// Writes a deterministic synthetic corpus: per family one homepage,
/// pages_per_family - 1 legitimate pages sharing the homepage's link sets,
/// styles, title words, language, and near-identical snapshot, plus exactly
/// one phishing page with disjoint link/style/image sets, a different
/// title and language, and a visually distinct snapshot. Returns the path
/// of the manifest written under out_dir.
std::string generate_synthetic_corpus(int n_families, int pages_per_family, std::uint64_t seed,
                                      const std::string& out_dir);

}  // namespace sitedelta::corpus
