"""
Contrast scoring from point picks
=================================

A labeller picks three points on the lesion (foreground) and three on the
surrounding normal skin (background). The picks are averaged per channel in
display space, and the WCAG contrast ratio of the two averaged colors is the
image's contrast score.
"""

from dermcontrast import (
    average_points,
    contrast_ratio,
    is_abnormal_score,
    luminance,
    srgb_channel_to_linear,
)

# Channel linearization: gamma-encoded sRGB -> linear light.
for channel in (0, 64, 119, 192, 255):
    print(f"linear({channel:3d}) = {srgb_channel_to_linear(channel):.6f}")
print()

# Three picks per region, averaged without re-quantizing.
lesion_picks = [(62, 38, 31), (71, 45, 37), (66, 41, 33)]
skin_picks = [(198, 152, 121), (205, 160, 130), (201, 155, 125)]
fg = average_points(lesion_picks)
bg = average_points(skin_picks)
print(f"averaged lesion color:     ({fg[0]:.2f}, {fg[1]:.2f}, {fg[2]:.2f})")
print(f"averaged skin color:       ({bg[0]:.2f}, {bg[1]:.2f}, {bg[2]:.2f})")
print(f"lesion luminance:          {luminance(fg):.4f}")
print(f"skin luminance:            {luminance(bg):.4f}")

score = contrast_ratio(fg, bg)
print(f"contrast score:            {score.value:.4f}  (range 1..21)")
print(f"abnormal (near-black)?     {is_abnormal_score(score)}")
print()

# The ratio is symmetric and pinned at the extremes.
print(f"white vs black: {contrast_ratio((255,) * 3, (0,) * 3).value:.1f}")
print(f"any color vs itself: {contrast_ratio(fg, fg).value:.1f}")

# Near-black backgrounds blow up the ratio; the luminance floor flags them
# so they can be excluded from grouping instead of skewing the median.
dark = contrast_ratio((240, 240, 240), (2, 2, 2))
print(f"near-black background: score {dark.value:.1f}, "
      f"abnormal = {is_abnormal_score(dark)}")
