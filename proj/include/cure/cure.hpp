#pragma once

// Convenience umbrella; each header is also usable on its own.

#include "cure/analysis.hpp"
#include "cure/crawler.hpp"
#include "cure/dataset.hpp"
#include "cure/embed.hpp"
#include "cure/genpipe.hpp"
#include "cure/gold.hpp"
#include "cure/mllm.hpp"
#include "cure/pipeline.hpp"
#include "cure/prompts.hpp"
#include "cure/scorers.hpp"
#include "cure/vendi.hpp"
