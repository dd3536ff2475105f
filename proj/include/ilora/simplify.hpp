#pragma once

#include <string>
#include <string_view>

#include "ilora/types.hpp"

namespace ilora::content {

/// Strips what the link cannot carry usefully from HTML: img, source and
/// embed tags, video/audio/picture/iframe/object/script elements with their
/// content, attributes holding data: URIs, and url(data:...) in CSS. Text,
/// links, structure, comments and styles are copied byte for byte.
/// Never fails; malformed markup is handled best-effort.
std::string simplify_html(std::string_view html);

/// simplify_html for text/html bodies, identity for everything else.
Bytes simplify_content(const Bytes& body, std::string_view content_type);

/// Replaces url(data:...) with url().
std::string strip_css_data_urls(std::string_view css);

}  // namespace ilora::content
