#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tubelink/ingest.hpp"
#include "tubelink/types.hpp"

// JSON-lines readers and writers for every on-disk format. All readers throw
// ValidationError with "<source>:<line>: <field>: <problem>" diagnostics.
// Frame ordinals are 1-based throughout. The exact layouts are documented in
// docs/formats.md.

namespace tubelink {

/// A proposals stream holds one or more videos, each a header line
/// {"video_id","frame_count","class_names",["width","height"]} followed by its
/// frame lines {"video_id","frame","width","height","proposals":[...]}.
/// Frames without a line are empty.
std::vector<VideoProposals> read_proposals(std::istream& in, const std::string& source = "<stream>");
std::vector<VideoProposals> load_proposal_file(const std::filesystem::path& path);
/// Like load_proposal_file, but the file must hold exactly one video.
VideoProposals load_proposals(const std::filesystem::path& path);

/// Writes the header and one line for every frame (empty frames included).
void write_proposals(std::ostream& out, const VideoProposals& video);
void save_proposals(const std::filesystem::path& path, std::span<const VideoProposals> videos);

/// Ground-truth lines: {"video_id","tube_id"?,"class": name|1-based int,
/// "t_start","t_end","width"?,"height"?,"extents":[{"box"}|{"mask_rle"}]}.
std::vector<GroundTruthTube> read_ground_truth(std::istream& in, ClassVocabulary& vocabulary,
                                               const std::string& source = "<stream>");
std::vector<GroundTruthTube> load_ground_truth(const std::filesystem::path& path,
                                               ClassVocabulary& vocabulary);
void write_ground_truth(std::ostream& out, std::span<const GroundTruthTube> tubes,
                        const ClassVocabulary& vocabulary);
void save_ground_truth(const std::filesystem::path& path, std::span<const GroundTruthTube> tubes,
                       const ClassVocabulary& vocabulary);

/// Tube lines: {"video_id","class","t_start","t_end","score","boxes":[...],
/// "mask_rle":[[...],...]?, "width"?, "height"?}. Read-back tubes carry regions
/// but no per-member score vectors.
std::vector<ActionTube> read_tubes(std::istream& in, ClassVocabulary& vocabulary,
                                   const std::string& source = "<stream>");
std::vector<ActionTube> load_tubes(const std::filesystem::path& path, ClassVocabulary& vocabulary);
void write_tubes(std::ostream& out, std::span<const ActionTube> tubes, const ClassVocabulary& vocabulary);
void save_tubes(const std::filesystem::path& path, std::span<const ActionTube> tubes,
                const ClassVocabulary& vocabulary);

/// Flow maps as JSON lines {"frame","width","height","magnitudes":[...]}.
std::vector<FlowMagnitudeMap> read_flow_json(std::istream& in, const std::string& source = "<stream>");
/// Flow maps as a binary stream of records: int32 width, int32 height,
/// int32 frame (little-endian), then width*height float32 magnitudes.
std::vector<FlowMagnitudeMap> read_flow_binary(std::istream& in, const std::string& source = "<stream>");
void write_flow_binary(std::ostream& out, std::span<const FlowMagnitudeMap> maps);
/// Dispatches on extension: ".bin" or ".flow" is binary, anything else JSON lines.
std::vector<FlowMagnitudeMap> load_flow_maps(const std::filesystem::path& path);

/// Segmentations as JSON lines {"frame","width","height","mask_rle":[...]};
/// an empty mask_rle means no foreground.
std::vector<BinarySegmentation> read_segmentations(std::istream& in, const std::string& source = "<stream>");
std::vector<BinarySegmentation> load_segmentations(const std::filesystem::path& path);

}  // namespace tubelink
