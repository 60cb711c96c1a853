"""Stage orchestration: configuration, data, reports and the stage commands."""
