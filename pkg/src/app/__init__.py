# src.app package
