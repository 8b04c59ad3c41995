# Refinement Package
# 生成动作的确定性后处理（下肢防滑步、上肢抓取修正）
