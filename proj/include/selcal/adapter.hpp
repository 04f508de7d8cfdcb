#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "selcal/similarity.hpp"

namespace selcal {

// One external scorer process speaking the line protocol:
//   request  {"a": "<candidate>", "b": "<reference>"}\n
//   response {"score": <number in [0, 1]>}\n
// The command runs under /bin/sh -c. Not thread-safe; AdapterPool serializes
// access per connection.
class AdapterConnection {
 public:
  explicit AdapterConnection(const std::string& command);
  ~AdapterConnection();

  AdapterConnection(const AdapterConnection&) = delete;
  AdapterConnection& operator=(const AdapterConnection&) = delete;

  double query(const std::string& a, const std::string& b);

 private:
  std::string read_line();
  void write_all(const std::string& data);
  void shutdown();

  std::string command_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// Fixed-size pool of connections to the same command. query() blocks until a
// connection is free.
class AdapterPool {
 public:
  AdapterPool(std::string command, std::size_t size);

  double query(const std::string& a, const std::string& b);

  const std::string& command() const { return command_; }
  std::size_t size() const { return connections_.size(); }

 private:
  std::string command_;
  std::vector<std::unique_ptr<AdapterConnection>> connections_;
  std::vector<std::size_t> idle_;
  std::mutex mutex_;
  std::condition_variable available_;
};

class AdapterSimilarity final : public SimilarityFn {
 public:
  AdapterSimilarity(std::string name, std::shared_ptr<AdapterPool> pool);

  const std::string& name() const override { return name_; }
  SimilarityKind kind() const override { return SimilarityKind::ExternalAdapter; }
  double operator()(const NormalizedAnswer& candidate,
                    const NormalizedAnswer& reference) const override;

 private:
  std::string name_;
  std::shared_ptr<AdapterPool> pool_;
};

}  // namespace selcal
