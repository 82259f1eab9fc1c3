// Shared fixtures: temp directories, mock scorer backends, toy token models.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "scalarexp/scoring.hpp"
#include "scalarexp/token_model.hpp"

namespace testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("scalarexp_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Masked backend with an explicit distribution; words outside the table are
// reported as multi-token. The distribution may depend on the construction
// through `shift`: logit(w) += shift(full_text, w).
class TableMaskedBackend : public scalarexp::ScorerBackend {
 public:
  using Shift = std::function<double(const std::string&, const std::string&)>;
  TableMaskedBackend(std::string id, std::map<std::string, double> logits, Shift shift = {})
      : id_(std::move(id)), logits_(std::move(logits)), shift_(std::move(shift)) {}

  std::string model_id() const override { return id_; }
  scalarexp::ScoringMode supported_mode() const override { return scalarexp::ScoringMode::MaskedSlot; }
  std::vector<std::string> vocabulary() const override {
    std::vector<std::string> v;
    for (const auto& [w, _] : logits_) v.push_back(w);
    return v;
  }
  std::vector<scalarexp::CandidateScore> score(const scalarexp::ScoreRequest& r) override {
    std::lock_guard lock(mu_);
    ++calls_;
    candidates_ += r.candidates.size();
    std::map<std::string, double> l;
    double mx = -INFINITY;
    for (const auto& [w, v] : logits_) {
      l[w] = v + (shift_ ? shift_(r.full_text, w) : 0.0);
      mx = std::max(mx, l[w]);
    }
    double z = 0;
    for (const auto& [_, v] : l) z += std::exp(v - mx);
    std::vector<scalarexp::CandidateScore> out;
    for (const auto& c : r.candidates) {
      auto it = l.find(c);
      if (it == l.end()) {
        out.push_back({c, std::nullopt, 2});
      } else {
        out.push_back({c, it->second - mx - std::log(z), 1});
      }
    }
    return out;
  }
  std::size_t calls() const { return calls_; }
  std::size_t candidates_scored() const { return candidates_; }

 private:
  std::string id_;
  std::map<std::string, double> logits_;
  Shift shift_;
  std::mutex mu_;
  std::size_t calls_ = 0;
  std::size_t candidates_ = 0;
};

// Autoregressive toy: whole-word pieces " word" for the listed words plus
// letter pieces, greedy longest match; logits are a hash of the context and
// the generated ids, plus an optional per-piece bonus.
class ToyCausalModel : public scalarexp::TokenLanguageModel {
 public:
  ToyCausalModel(std::string id, const std::vector<std::string>& words,
                 std::map<std::string, double> bonus = {})
      : id_(std::move(id)), bonus_(std::move(bonus)) {
    for (const auto& w : words) add(" " + w);
    for (char c = 'a'; c <= 'z'; ++c) {
      add(std::string(1, c));
      add(std::string(" ") + c);
    }
  }
  std::string model_id() const override { return id_; }
  scalarexp::ScoringMode mode() const override { return scalarexp::ScoringMode::Continuation; }
  const std::vector<std::string>& vocabulary() const override { return vocab_; }
  std::vector<int> tokenize(std::string_view text) const override {
    std::vector<int> out;
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t best = 0;
      int id = -1;
      for (std::size_t len = text.size() - i; len > 0; --len) {
        auto it = index_.find(std::string(text.substr(i, len)));
        if (it != index_.end()) {
          best = len;
          id = it->second;
          break;
        }
      }
      if (id < 0) throw scalarexp::ScoringError("untokenizable text");
      out.push_back(id);
      i += best;
    }
    return out;
  }
  std::vector<double> next_token_logits(std::string_view context, std::span<const int> generated) const override {
    std::string key(context);
    for (int g : generated) key += "|" + std::to_string(g);
    const std::uint64_t h = fnv1a(key);
    std::vector<double> logits(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      const std::uint64_t hi = fnv1a(std::to_string(i), h);
      logits[i] = static_cast<double>(hi % 1000) / 250.0;
      if (generated.empty()) {
        auto b = bonus_.find(vocab_[i]);
        if (b != bonus_.end()) logits[i] += b->second;
      }
    }
    return logits;
  }

 private:
  void add(std::string piece) {
    if (index_.count(piece)) return;
    index_.emplace(piece, static_cast<int>(vocab_.size()));
    vocab_.push_back(std::move(piece));
  }
  std::string id_;
  std::vector<std::string> vocab_;
  std::map<std::string, int> index_;
  std::map<std::string, double> bonus_;
};

// Forwards to another backend and counts requests.
class CountingBackend : public scalarexp::ScorerBackend {
 public:
  explicit CountingBackend(std::shared_ptr<scalarexp::ScorerBackend> inner) : inner_(std::move(inner)) {}
  std::string model_id() const override { return inner_->model_id(); }
  scalarexp::ScoringMode supported_mode() const override { return inner_->supported_mode(); }
  std::vector<std::string> vocabulary() const override { return inner_->vocabulary(); }
  std::vector<scalarexp::CandidateScore> score(const scalarexp::ScoreRequest& r) override {
    calls_ += 1;
    candidates_ += r.candidates.size();
    return inner_->score(r);
  }
  std::size_t calls() const { return calls_; }
  std::size_t candidates_scored() const { return candidates_; }

 private:
  std::shared_ptr<scalarexp::ScorerBackend> inner_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> candidates_{0};
};

}  // namespace testing
