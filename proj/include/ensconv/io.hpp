#pragma once

// Text formats (UTF-8, LF newlines):
//
//   prediction array   line 1 "t m k", then t lines of m integers in [0, k)
//   truth labels       m integers, whitespace separated (one line or one per line)
//   oob mask           t lines of m characters '0' / '1'
//   dataset            CSV with a header row; the last column is an integer label
//   model spec         JSON {k, pi: [...], mu: [{family: "beta"|"dirichlet", params: [...]}]}

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ensconv/first_order.hpp"
#include "ensconv/trainer.hpp"
#include "ensconv/types.hpp"

namespace ensconv {

PredictionArray read_prediction_array(std::istream& in, const std::string& source);
void write_prediction_array(std::ostream& out, const PredictionArray& array);

TruthLabels read_truth(std::istream& in, const std::string& source);
void write_truth(std::ostream& out, const TruthLabels& truth);

OobMask read_oob_mask(std::istream& in, const std::string& source);
void write_oob_mask(std::ostream& out, const OobMask& mask);

Dataset read_dataset_csv(std::istream& in, const std::string& source);
void write_dataset_csv(std::ostream& out, const Dataset& data);

FirstOrderModel model_from_json(const nlohmann::json& spec);
nlohmann::ordered_json model_to_json(const FirstOrderModel& model);

// File-path conveniences; the stream is opened in binary mode.
PredictionArray load_prediction_array(const std::filesystem::path& path);
TruthLabels load_truth(const std::filesystem::path& path);
OobMask load_oob_mask(const std::filesystem::path& path);
Dataset load_dataset_csv(const std::filesystem::path& path);
FirstOrderModel load_model(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

/// "fnv1a64:<16 hex digits>" over the bytes.
std::string digest(const std::string& bytes);

}  // namespace ensconv
