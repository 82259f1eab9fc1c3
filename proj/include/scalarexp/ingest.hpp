// Loading and normalizing human scalar-inference datasets into item records.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalarexp/core.hpp"

namespace scalarexp {

class IngestError : public Error {
 public:
  using Error::Error;
};

enum class DatasetId { Degen2015, VanTiel2016, Gotzner2018, Pankratz2021, Ronai2022, Ronai2022Cloze };
enum class SiScale { Likert1To7, Proportion };

std::string_view to_string(DatasetId id);
DatasetId parse_dataset_id(std::string_view text);
/// The four cross-scale datasets, in reporting order.
std::span<const DatasetId> cross_scale_datasets();

struct DatasetSpec {
  DatasetId id;
  std::filesystem::path source_path;
  SiScale si_scale;
};

/// Builds a spec with the registered SI scale for `id`.
DatasetSpec make_dataset_spec(DatasetId id, std::filesystem::path path);

enum class ResponseEncoding { Numeric, Binary };
enum class CovariateKind { Continuous, Binary };

struct CovariateColumn {
  std::string column;
  std::string name;  // name used downstream (covariate map key)
  CovariateKind kind;
};

/// Column layout registered for one dataset. `per_response` files hold one row
/// per participant judgment and are averaged to one value per item.
struct DatasetSchema {
  DatasetId id;
  SiScale si_scale;
  bool per_response;
  ResponseEncoding encoding;
  std::string weak_column;      // empty = fixed scale
  std::string strong_column;
  std::string pos_column;
  std::string context_column;
  std::string response_column;
  std::string weak_offset_column;  // optional column flagging the templated occurrence
  std::optional<Scale> fixed_scale;
  std::vector<CovariateColumn> covariates;
  std::size_t expected_items;
  std::size_t expected_scales;
};

const DatasetSchema& schema_for(DatasetId id);

/// Covariate names carried by degen2015 items.
std::span<const std::string> within_scale_covariates();

struct StimulusItem {
  DatasetId dataset_id = DatasetId::Degen2015;
  Scale scale;
  std::string context;
  double human_si = 0.0;
  std::map<std::string, double> covariates;
  std::optional<double> cloze_accessibility;
  /// Byte offset of the weak term occurrence used for templating, if unique or flagged.
  std::optional<std::size_t> weak_offset;

  friend bool operator==(const StimulusItem&, const StimulusItem&) = default;
};

struct LoadOptions {
  bool enforce_expected_counts = true;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_rejected_bounds = 0;
  std::size_t rows_rejected_missing_weak = 0;
  std::size_t multiword_scales_dropped = 0;
  std::size_t items = 0;
  std::size_t scales = 0;
};

std::vector<StimulusItem> load_dataset(const DatasetSpec& spec, const LoadOptions& options = {},
                                       LoadReport* report = nullptr);

struct ClozeRecord {
  Scale scale;
  double accessibility = 0.0;
};

/// Reads the Cloze accessibility table (columns Weak, Strong, Accessibility).
std::vector<ClozeRecord> load_cloze(const std::filesystem::path& path);

/// Attaches accessibility by (weak, strong) key; unmatched items stay unset.
std::vector<StimulusItem> join_cloze(std::vector<StimulusItem> items,
                                     std::span<const ClozeRecord> records);

/// Finds whole-word, case-insensitive occurrences of `word` in `text`.
std::vector<std::size_t> find_word(std::string_view text, std::string_view word);

/// Canonical line-delimited JSON item store.
void write_item_store(std::ostream& out, std::span<const StimulusItem> items);
std::vector<StimulusItem> read_item_store(std::istream& in);

std::size_t count_unique_scales(std::span<const StimulusItem> items);

}  // namespace scalarexp
