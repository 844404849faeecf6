#pragma once

#include <span>
#include <vector>

#include "tubelink/config.hpp"
#include "tubelink/ingest.hpp"
#include "tubelink/types.hpp"

namespace tubelink {

/// Links every video on a pool of `threads` workers. Result i belongs to
/// videos[i] whatever the completion order. The first exception thrown by a
/// worker is rethrown after all workers finish.
std::vector<std::vector<ActionTube>> link_videos(std::span<const VideoProposals> videos,
                                                 const RunSettings& settings);

/// Drops proposals whose actionness on the matching flow map is below the
/// threshold. Frames without a flow map are left untouched.
void prune_video_by_actionness(VideoProposals& video, std::span<const FlowMagnitudeMap> flow, double threshold);

}  // namespace tubelink
