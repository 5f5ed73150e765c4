#pragma once

#include "drugrag/chat.hpp"
#include "drugrag/config.hpp"
#include "drugrag/cypher.hpp"
#include "drugrag/embedding.hpp"
#include "drugrag/embedding_cache.hpp"
#include "drugrag/entities.hpp"
#include "drugrag/error.hpp"
#include "drugrag/evaluation.hpp"
#include "drugrag/graph.hpp"
#include "drugrag/kb.hpp"
#include "drugrag/pipeline.hpp"
#include "drugrag/prompts.hpp"
#include "drugrag/text.hpp"
#include "drugrag/vector_index.hpp"
